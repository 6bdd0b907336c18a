// Command-line front end: run RAM programs and machines, build and check
// tableaux, poke at map primitives, and drive the randomized simulation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pelram/dilution.hpp"
#include "pelram/pelsim.hpp"
#include "pelram/program.hpp"
#include "pelram/random.hpp"
#include "pelram/shift_elim.hpp"
#include "pelram/tableau.hpp"
#include "pelram/vm.hpp"
#include "pelram/wordmap.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace pelram;

struct GlobalOpts {
    std::optional<std::uint64_t> seed;
    std::string tape_path;
    std::uint64_t budget = 1'000'000;
    std::uint64_t ceiling = std::uint64_t{1} << 26;
    std::string format = "text";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw range_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::unique_ptr<RandomSource> make_rng(const GlobalOpts& g) {
    if (!g.tape_path.empty() && g.seed)
        throw range_error("--seed and --tape are mutually exclusive");
    if (!g.tape_path.empty())
        return std::make_unique<OracleTape>(OracleTape::from_text(read_file(g.tape_path)));
    if (g.seed) return std::make_unique<SeededPrng>(*g.seed);
    if (const char* env = std::getenv("PELRAM_SEED"))
        return std::make_unique<SeededPrng>(std::stoull(env));
    return std::make_unique<SeededPrng>(std::random_device{}());
}

// Every record carries the same leading keys so downstream tooling can
// rely on them.
void emit(const GlobalOpts& g, const std::string& cmd, const std::string& outcome,
          std::uint64_t steps, const json& extra, const std::string& text) {
    if (g.format == "json-lines") {
        json rec;
        rec["cmd"] = cmd;
        if (g.seed)
            rec["seed"] = *g.seed;
        else
            rec["seed"] = nullptr;
        rec["outcome"] = outcome;
        rec["steps"] = steps;
        for (auto& [k, v] : extra.items()) rec[k] = v;
        std::cout << rec.dump() << "\n";
    } else {
        std::cout << text << "\n";
    }
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

int exit_code(Outcome oc) {
    switch (oc) {
        case Outcome::accepted: return 0;
        case Outcome::rejected: return 1;
        case Outcome::budget_exhausted: return 2;
        case Outcome::runtime_error: return 3;
    }
    return 3;
}

int cmd_run_ram(const GlobalOpts& g, const std::string& path, const Nat& input) {
    Program p = parse_program(read_file(path));
    auto rng = make_rng(g);
    RunResult r = run(p, input, g.budget, *rng);
    json extra;
    extra["final_r0"] = r.final_r0.to_string();
    if (!r.diagnostic.empty()) extra["diagnostic"] = r.diagnostic;
    std::string text = std::string(outcome_name(r.outcome)) + " after " +
                       std::to_string(r.steps_used) + " steps, R0 = " +
                       r.final_r0.to_string();
    if (!r.diagnostic.empty()) text += " (" + r.diagnostic + ")";
    emit(g, "run-ram", outcome_name(r.outcome), r.steps_used, extra, text);
    return exit_code(r.outcome);
}

int cmd_run_tm(const GlobalOpts& g, const std::string& path, const Nat& input,
               std::uint64_t s, std::uint64_t max_steps) {
    TmSpec spec = parse_tm(read_file(path));
    TmOutcome out = run_tm_reference(spec, input, s, max_steps);
    json extra;
    extra["tape_size"] = s;
    emit(g, "run-tm", tm_outcome_name(out.kind), out.steps, extra,
         std::string(tm_outcome_name(out.kind)) + " after " +
             std::to_string(out.steps) + " steps");
    return out.kind == TmOutcome::Kind::accepted ? 0 : 1;
}

int cmd_tableau(const GlobalOpts& g, const std::string& sub,
                const std::string& tm_path, const Nat& input, std::uint64_t s,
                std::uint64_t n, const std::string& in_path,
                const std::string& out_path, std::optional<std::uint64_t> bit) {
    TmSpec spec = parse_tm(read_file(tm_path));
    if (sub == "build") {
        Tableau t = build_tableau(spec, input, s, n);
        std::string dump = tableau_dump(t);
        if (!out_path.empty()) {
            std::ofstream of(out_path);
            of << dump << "\n";
        }
        auto st = verify_tableau(t, spec, input);
        json extra;
        extra["rows"] = t.n;
        extra["valid"] = st.valid;
        emit(g, "tableau-build", st.valid ? "valid" : "invalid", t.n, extra,
             out_path.empty() ? dump
                              : "wrote " + std::to_string(t.n) + " rows to " +
                                    out_path);
        return st.valid ? 0 : 1;
    }

    Tableau t = tableau_restore(read_file(in_path));
    if (sub == "corrupt") {
        std::uint64_t nm = t.m * t.n;
        std::uint64_t target;
        if (bit) {
            target = *bit;
        } else {
            auto rng = make_rng(g);
            target = rand_general(Nat(3 * nm), *rng).to_u64();
        }
        tableau_flip_bit(t, target);
    }
    auto st = verify_tableau(t, spec, input);
    std::string verdict = st.valid ? "valid" : "invalid";
    std::string text = verdict;
    if (st.valid) text += std::string(", ") + tm_outcome_name(*st.terminal);
    json extra;
    if (st.valid) extra["terminal"] = tm_outcome_name(*st.terminal);
    emit(g, "tableau-" + sub, verdict, t.n, extra, text);
    return st.valid ? 0 : 1;
}

int cmd_mapops(const GlobalOpts& g, const std::string& op, const std::string& v,
               const std::string& u, const std::string& i, std::uint64_t w,
               const std::string& inp_dec) {
    Nat V = v.empty() ? Nat(0) : Nat::from_hex(v);
    Nat U = u.empty() ? Nat(0) : Nat::from_hex(u);
    Nat I = i.empty() ? Nat(0) : Nat::from_hex(i);
    Nat result;
    if (op == "madd") result = madd(V, U, I, w);
    else if (op == "mcarry") result = mcarry(V, U, I, w);
    else if (op == "mneg") result = mneg(V, I, w);
    else if (op == "mgt") result = mgt(V, U, I, w);
    else if (op == "meq") result = meq(V, U, I, w);
    else if (op == "mask") result = mask_of(I, w);
    else if (op == "flags") result = flags_data(V, I, w).flags;
    else if (op == "data") result = flags_data(V, I, w).data;
    else if (op == "scale") result = scale_domain(I, Nat::from_dec(inp_dec.empty() ? "0" : inp_dec));
    else throw range_error("unknown map op '" + op + "'");
    json extra;
    extra["result"] = result.to_hex();
    emit(g, "mapops", "ok", 0, extra, result.to_hex());
    return 0;
}

int cmd_dilute(const GlobalOpts& g, const Nat& target_w, std::uint64_t k) {
    auto rng = make_rng(g);
    SparseDomain d = build_domain(target_w, k, *rng);
    bool sparse = is_sparse(d.domain, d.w);
    std::uint64_t weight = set_bits(d.domain).size();
    json extra;
    extra["w"] = d.w.to_string();
    extra["hamming_weight"] = weight;
    extra["sparse"] = sparse;
    std::ostringstream text;
    text << "w: " << d.w.to_string() << ", hamming weight: " << weight
         << ", sparse: " << (sparse ? "true" : "false");
    emit(g, "dilute", sparse ? "ok" : "violated", weight, extra, text.str());
    return sparse ? 0 : 1;
}

int cmd_inputverify(const GlobalOpts& g, std::uint64_t map_w, std::uint64_t w,
                    const Nat& input, const std::string& ix_hex, const Nat& wx) {
    auto rng = make_rng(g);
    Nat Ix = Nat::from_hex(ix_hex);
    WordMap m = input_verify(Ix, wx, map_w, input, w, *rng);
    auto elems = map_elements(m.L, m.I, m.w);
    json extra;
    extra["domain"] = m.I.to_hex();
    extra["contents"] = m.L.to_hex();
    extra["elements"] = json::array();
    std::ostringstream text;
    text << elems.size() << " elements:";
    for (auto& [ind, val] : elems) {
        extra["elements"].push_back(val.to_string());
        text << " " << val.to_string();
    }
    emit(g, "inputverify", "ok", elems.size(), extra, text.str());
    return 0;
}

int cmd_pelsim(const GlobalOpts& g, const std::string& tm_path, const Nat& input,
               bool lucky, std::uint64_t k_bits, std::uint64_t dilution_cap,
               std::uint64_t max_iterations, bool input_verify_route) {
    TmSpec spec = parse_tm(read_file(tm_path));
    SimLimits lim;
    lim.max_iterations = max_iterations;
    lim.k_bits = k_bits;
    if (dilution_cap) lim.dilution_target_cap = Nat(dilution_cap);
    lim.use_input_verify = input_verify_route;

    std::unique_ptr<RandomSource> rng;
    if (lucky) {
        lim = lucky_limits(spec, 2);
        lim.use_input_verify = input_verify_route;
        rng = std::make_unique<OracleTape>(make_lucky_tape(spec, input, 2));
    } else {
        rng = make_rng(g);
    }
    SimReport rep = simulate_pel(spec, input, *rng, lim);
    json extra;
    extra["iterations"] = rep.iterations;
    extra["diagnostic"] = rep.diagnostic;
    emit(g, "pelsim", outcome_name(rep.outcome), rep.iterations, extra,
         std::string(outcome_name(rep.outcome)) + " (" + rep.diagnostic + ")");
    return rep.outcome == Outcome::accepted ? 0 : 1;
}

int cmd_rp2brp(const GlobalOpts& g, const std::string& path, std::uint64_t maxstep,
               const Nat& m_bound, bool bpp, const std::string& out_path) {
    Program p = parse_program(read_file(path));
    auto plan = RpToBrpPlan::make(maxstep, m_bound, bpp);
    Program q = rp_to_brp(p, plan);
    std::string text = serialize_program(q);
    if (!out_path.empty()) {
        std::ofstream of(out_path);
        of << text;
        emit(g, "rp2brp", "ok", q.instructions.size(),
             json{{"k_tilde", plan.k_tilde.to_string()}},
             "wrote " + std::to_string(q.instructions.size()) +
                 " instructions to " + out_path);
    } else if (g.format == "json-lines") {
        emit(g, "rp2brp", "ok", q.instructions.size(),
             json{{"k_tilde", plan.k_tilde.to_string()}, {"assembly", text}}, "");
    } else {
        std::cout << text;
    }
    return 0;
}

int cmd_stats_rp2brp(const GlobalOpts& g, const std::string& path,
                     std::uint64_t maxstep, const Nat& m_bound, bool bpp,
                     std::uint64_t trials, const Nat& in_input,
                     const Nat& out_input) {
    Program p = parse_program(read_file(path));
    auto plan = RpToBrpPlan::make(maxstep, m_bound, bpp);
    Program q = rp_to_brp(p, plan);

    std::uint64_t master = g.seed ? *g.seed : std::random_device{}();
    std::mt19937_64 seeds(master);
    std::uint64_t in_accepts = 0, out_accepts = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        SeededPrng r1(seeds());
        if (run(q, in_input, g.budget, r1).outcome == Outcome::accepted)
            ++in_accepts;
        SeededPrng r2(seeds());
        if (run(q, out_input, g.budget, r2).outcome == Outcome::accepted)
            ++out_accepts;
    }
    double rate = trials ? double(in_accepts) / trials : 0.0;
    double sigma = trials ? std::sqrt(rate * (1.0 - rate) / trials) : 0.0;
    json extra;
    extra["trials"] = trials;
    extra["in_accept_rate"] = fixed6(rate);
    extra["interval_3sigma"] =
        fixed6(std::max(0.0, rate - 3 * sigma)) + ".." + fixed6(rate + 3 * sigma);
    extra["out_accepts"] = out_accepts;
    std::ostringstream text;
    text << "trials: " << trials << "\nin-language accept rate: " << fixed6(rate)
         << " (3-sigma interval " << fixed6(std::max(0.0, rate - 3 * sigma))
         << " .. " << fixed6(rate + 3 * sigma) << ")\nout-of-language accepts: "
         << out_accepts;
    emit(g, "stats-rp2brp", "ok", trials, extra, text.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unit-cost RAM and tableau-simulation toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "PRNG seed (exclusive with --tape)");
    app.add_option("--tape", g.tape_path, "oracle tape file of 0/1 characters");
    app.add_option("--budget", g.budget, "step budget for RAM runs");
    app.add_option("--bit-ceiling", g.ceiling, "bit-length ceiling");
    app.add_option("--format", g.format, "text or json-lines")
        ->check(CLI::IsMember({"text", "json-lines"}));

    // run-ram
    std::string ram_path;
    std::string input_dec = "0";
    auto* run_ram = app.add_subcommand("run-ram", "run a RAM program");
    run_ram->add_option("program", ram_path)->required();
    run_ram->add_option("--input", input_dec);

    // run-tm
    std::string tm_path;
    std::uint64_t tape_size = 2, max_steps = 1u << 12;
    auto* run_tm = app.add_subcommand("run-tm", "run a machine directly");
    run_tm->add_option("machine", tm_path)->required();
    run_tm->add_option("--input", input_dec);
    run_tm->add_option("--tape-size", tape_size);
    run_tm->add_option("--max-steps", max_steps);

    // tableau build|verify|corrupt
    std::string tab_sub, tab_in, tab_out;
    std::uint64_t tab_n = 64;
    std::optional<std::uint64_t> tab_bit;
    auto* tab = app.add_subcommand("tableau", "build, verify or corrupt tableaux");
    tab->add_option("action", tab_sub)->required()
        ->check(CLI::IsMember({"build", "verify", "corrupt"}));
    tab->add_option("--tm", tm_path)->required();
    tab->add_option("--input", input_dec);
    tab->add_option("-s,--tape-size", tape_size);
    tab->add_option("-n,--rows", tab_n);
    tab->add_option("--in", tab_in);
    tab->add_option("--out", tab_out);
    tab->add_option("--bit", tab_bit);

    // mapops
    std::string mop, mv, mu, mi, m_inp;
    std::uint64_t mw = 2;
    auto* mapops = app.add_subcommand("mapops", "evaluate a map primitive");
    mapops->add_option("--op", mop)->required();
    mapops->add_option("--v", mv);
    mapops->add_option("--u", mu);
    mapops->add_option("--i", mi);
    mapops->add_option("-w,--width", mw);
    mapops->add_option("--inp", m_inp);

    // dilute
    std::string target_w_dec = "9";
    std::uint64_t dk = 1u << 16;
    auto* dilute = app.add_subcommand("dilute", "randomized sparse domain");
    dilute->add_option("--target-w", target_w_dec);
    dilute->add_option("--k", dk);

    // inputverify
    std::uint64_t iv_map_w = 3, iv_w = 2;
    std::string iv_ix = "1", iv_wx = "100000";
    auto* iv = app.add_subcommand("inputverify", "multiplication-free input pinning");
    iv->add_option("--map-width", iv_map_w);
    iv->add_option("--tab-width", iv_w);
    iv->add_option("--input", input_dec);
    iv->add_option("--ix", iv_ix);
    iv->add_option("--wx", iv_wx);

    // pelsim
    bool lucky = false, iv_route = false;
    std::uint64_t k_bits = 0, dilution_cap = 0, max_iterations = 2;
    auto* pelsim = app.add_subcommand("pelsim", "randomized simulation driver");
    pelsim->add_option("--tm", tm_path)->required();
    pelsim->add_option("--input", input_dec);
    pelsim->add_flag("--lucky-tape", lucky, "craft the oracle bits internally");
    pelsim->add_option("--k-bits", k_bits);
    pelsim->add_option("--dilution-cap", dilution_cap);
    pelsim->add_option("--max-iterations", max_iterations);
    pelsim->add_flag("--input-verify-route", iv_route);

    // rp2brp
    std::uint64_t maxstep = 2;
    std::string m_bound_dec = "2", rp_out;
    bool bpp = false;
    auto* rp2brp = app.add_subcommand("rp2brp", "collate rand() into one rand2()");
    rp2brp->add_option("program", ram_path)->required();
    rp2brp->add_option("--maxstep", maxstep);
    rp2brp->add_option("--m-bound", m_bound_dec);
    rp2brp->add_flag("--bpp", bpp);
    rp2brp->add_option("--out", rp_out);

    // stats
    std::uint64_t trials = 10000;
    std::string in_input_dec = "1", out_input_dec = "0";
    auto* stats = app.add_subcommand("stats", "Monte Carlo acceptance tables");
    std::string stats_what;
    stats->add_option("harness", stats_what)->required()
        ->check(CLI::IsMember({"rp2brp"}));
    stats->add_option("--program", ram_path)->required();
    stats->add_option("--maxstep", maxstep);
    stats->add_option("--m-bound", m_bound_dec);
    stats->add_flag("--bpp", bpp);
    stats->add_option("--trials", trials);
    stats->add_option("--in-input", in_input_dec);
    stats->add_option("--out-input", out_input_dec);

    for (auto* sub : {run_ram, run_tm, tab, mapops, dilute, iv, pelsim, rp2brp, stats})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    set_bit_ceiling(g.ceiling);
    if (!g.seed && g.tape_path.empty())
        if (const char* env = std::getenv("PELRAM_SEED")) g.seed = std::stoull(env);

    try {
        Nat input = Nat::from_dec(input_dec);
        if (run_ram->parsed()) return cmd_run_ram(g, ram_path, input);
        if (run_tm->parsed())
            return cmd_run_tm(g, tm_path, input, tape_size, max_steps);
        if (tab->parsed())
            return cmd_tableau(g, tab_sub, tm_path, input, tape_size, tab_n,
                               tab_in, tab_out, tab_bit);
        if (mapops->parsed()) return cmd_mapops(g, mop, mv, mu, mi, mw, m_inp);
        if (dilute->parsed())
            return cmd_dilute(g, Nat::from_dec(target_w_dec), dk);
        if (iv->parsed())
            return cmd_inputverify(g, iv_map_w, iv_w, input, iv_ix,
                                   Nat::from_dec(iv_wx));
        if (pelsim->parsed())
            return cmd_pelsim(g, tm_path, input, lucky, k_bits, dilution_cap,
                              max_iterations, iv_route);
        if (rp2brp->parsed())
            return cmd_rp2brp(g, ram_path, maxstep, Nat::from_dec(m_bound_dec),
                              bpp, rp_out);
        if (stats->parsed())
            return cmd_stats_rp2brp(g, ram_path, maxstep,
                                    Nat::from_dec(m_bound_dec), bpp, trials,
                                    Nat::from_dec(in_input_dec),
                                    Nat::from_dec(out_input_dec));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
