#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"

namespace pelram {

enum class RandMode { none, rand_pow2, rand_general };

// Which optional operations a program may use. The non-optional core
// (+, <<, and the Boolean set) is always allowed.
struct OpSetPolicy {
    bool monus = false;
    bool mul = false;
    bool intdiv = false;
    bool exactdiv = false;
    bool shr = false;
    RandMode rand_mode = RandMode::none;

    bool allows(PrimOp op) const {
        switch (op) {
            case PrimOp::add:
            case PrimOp::shl:
            case PrimOp::band:
            case PrimOp::bor:
            case PrimOp::bxor:
            case PrimOp::bnot:
            case PrimOp::clr:
                return true;
            case PrimOp::monus: return monus;
            case PrimOp::mul: return mul;
            case PrimOp::intdiv: return intdiv;
            case PrimOp::exactdiv: return exactdiv;
            case PrimOp::shr: return shr;
        }
        return false;
    }
};

struct Operand {
    enum class Kind { lit0, lit1, direct, indirect };
    Kind kind = Kind::lit0;
    std::uint64_t reg = 0;

    static Operand lit(bool one) { return {one ? Kind::lit1 : Kind::lit0, 0}; }
    static Operand direct(std::uint64_t r) { return {Kind::direct, r}; }
    static Operand indirect(std::uint64_t r) { return {Kind::indirect, r}; }

    bool is_lit() const { return kind == Kind::lit0 || kind == Kind::lit1; }
    bool operator==(const Operand&) const = default;
};

enum class Opcode {
    assign,       // dst <= a
    prim,         // dst <= a OP b   (bnot: dst <= ~a)
    rand_pow2,    // dst <= rand2(a)
    rand_gen,     // dst <= rand(a)
    jump,         // jmp target
    branch_eq,    // beq a b target
    halt,         // stop; accept iff R0 != 0
    halt_accept,  // R0 <= 1; stop
    halt_reject,  // R0 <= 0; stop
};

struct Instruction {
    Opcode op = Opcode::halt;
    PrimOp prim = PrimOp::add;
    Operand dst;
    Operand a;
    Operand b;
    std::size_t target = 0;

    bool operator==(const Instruction&) const = default;
};

struct Program {
    std::vector<Instruction> instructions;
    OpSetPolicy policy;
    bool uses_indirect = false;
    std::optional<std::uint64_t> max_static_register;
};

namespace asmdetail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

inline bool is_ident(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

inline Operand parse_operand(const std::string& t, std::size_t line) {
    if (t == "0") return Operand::lit(false);
    if (t == "1") return Operand::lit(true);
    bool digits = !t.empty();
    for (char c : t)
        if (!std::isdigit(static_cast<unsigned char>(c))) digits = false;
    if (digits)
        throw syntax_error(line, "literal operands must be 0 or 1, got '" + t + "'");
    if (t.size() >= 2 && t[0] == 'R') {
        bool ind = t[1] == '@';
        std::string num = t.substr(ind ? 2 : 1);
        if (num.empty() || num.size() > 18)
            throw syntax_error(line, "bad register '" + t + "'");
        for (char c : num)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw syntax_error(line, "bad register '" + t + "'");
        std::uint64_t r = std::stoull(num);
        return ind ? Operand::indirect(r) : Operand::direct(r);
    }
    throw syntax_error(line, "bad operand '" + t + "'");
}

inline std::optional<PrimOp> binop_token(const std::string& t) {
    if (t == "+") return PrimOp::add;
    if (t == "-.") return PrimOp::monus;
    if (t == "*") return PrimOp::mul;
    if (t == "//") return PrimOp::intdiv;
    if (t == "/") return PrimOp::exactdiv;
    if (t == "<<") return PrimOp::shl;
    if (t == ">>") return PrimOp::shr;
    if (t == "&") return PrimOp::band;
    if (t == "|") return PrimOp::bor;
    if (t == "^") return PrimOp::bxor;
    if (t == "clr") return PrimOp::clr;
    return std::nullopt;
}

// One source statement; `ble` is sugar and expands to several instructions.
struct Stmt {
    enum class Kind { instr, ble } kind = Kind::instr;
    Instruction instr;           // kind == instr (target = label id for branches)
    Operand a, b;                // kind == ble
    std::size_t label_id = 0;    // branch target (index into label table)
    bool has_label = false;
    std::size_t line = 0;
};

}  // namespace asmdetail

// Number of instructions the a<=b comparison sequence expands to.
inline constexpr std::size_t kBleExpansionLength = 16;

// Parses the line-oriented RAM assembly format:
//   op <comma-list>           policy header (first non-comment line)
//   name:                     label
//   Rd <= <expr>              assignment / primitive / rand
//   jmp L | beq a b L | ble a b L
//   accept | reject | halt
// '#' starts a comment. Registers are R<n> (direct) or R@<n> (indirect);
// literal operands can only be 0 or 1.
inline Program parse_program(const std::string& text) {
    using namespace asmdetail;

    std::vector<std::string> lines;
    {
        std::istringstream is(text);
        std::string l;
        while (std::getline(is, l)) {
            auto hash = l.find('#');
            if (hash != std::string::npos) l = l.substr(0, hash);
            lines.push_back(l);
        }
    }

    OpSetPolicy policy;
    bool saw_header = false;
    std::vector<Stmt> stmts;
    std::map<std::string, std::size_t> label_to_stmt;  // label -> stmt index
    std::vector<std::string> pending_labels;
    std::vector<std::pair<std::string, std::size_t>> label_refs;  // name, line

    auto label_id_of = [&](const std::string& name, std::size_t line) {
        label_refs.emplace_back(name, line);
        return label_refs.size() - 1;
    };

    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::size_t lineno = ln + 1;
        auto toks = tokenize(lines[ln]);
        if (toks.empty()) continue;

        if (!saw_header) {
            if (toks[0] != "op")
                throw syntax_error(lineno, "expected 'op' policy header");
            std::string rest;
            for (std::size_t i = 1; i < toks.size(); ++i) rest += toks[i];
            std::istringstream is(rest);
            std::string tok;
            while (std::getline(is, tok, ',')) {
                if (tok.empty()) continue;
                if (tok == "+" || tok == "<<" || tok == "bool") continue;  // core
                else if (tok == "-.") policy.monus = true;
                else if (tok == "*") policy.mul = true;
                else if (tok == "//") policy.intdiv = true;
                else if (tok == "/") policy.exactdiv = true;
                else if (tok == ">>") policy.shr = true;
                else if (tok == "rand2") {
                    if (policy.rand_mode == RandMode::none)
                        policy.rand_mode = RandMode::rand_pow2;
                } else if (tok == "rand") {
                    policy.rand_mode = RandMode::rand_general;
                } else {
                    throw syntax_error(lineno, "unknown op token '" + tok + "'");
                }
            }
            saw_header = true;
            continue;
        }

        if (toks.size() == 1 && toks[0].back() == ':') {
            std::string name = toks[0].substr(0, toks[0].size() - 1);
            if (!is_ident(name)) throw syntax_error(lineno, "bad label '" + name + "'");
            if (label_to_stmt.count(name))
                throw syntax_error(lineno, "duplicate label '" + name + "'");
            pending_labels.push_back(name);
            continue;
        }

        Stmt st;
        st.line = lineno;

        if (toks[0] == "jmp") {
            if (toks.size() != 2) throw syntax_error(lineno, "jmp takes one label");
            st.instr.op = Opcode::jump;
            st.instr.target = label_id_of(toks[1], lineno);
            st.has_label = true;
        } else if (toks[0] == "beq" || toks[0] == "ble") {
            if (toks.size() != 4)
                throw syntax_error(lineno, toks[0] + " takes two operands and a label");
            Operand a = parse_operand(toks[1], lineno);
            Operand b = parse_operand(toks[2], lineno);
            st.label_id = label_id_of(toks[3], lineno);
            st.has_label = true;
            if (toks[0] == "beq") {
                st.instr.op = Opcode::branch_eq;
                st.instr.a = a;
                st.instr.b = b;
                st.instr.target = st.label_id;
            } else {
                st.kind = Stmt::Kind::ble;
                st.a = a;
                st.b = b;
            }
        } else if (toks[0] == "accept") {
            st.instr.op = Opcode::halt_accept;
        } else if (toks[0] == "reject") {
            st.instr.op = Opcode::halt_reject;
        } else if (toks[0] == "halt") {
            st.instr.op = Opcode::halt;
        } else if (toks.size() >= 3 && toks[1] == "<=") {
            Operand dst = parse_operand(toks[0], lineno);
            if (dst.is_lit()) throw syntax_error(lineno, "cannot assign to a literal");
            st.instr.dst = dst;
            if (toks.size() == 3) {
                const std::string& e = toks[2];
                if (e.rfind("rand2(", 0) == 0 && e.back() == ')') {
                    if (policy.rand_mode == RandMode::none)
                        throw policy_violation("rand2 not in the declared op set");
                    st.instr.op = Opcode::rand_pow2;
                    st.instr.a = parse_operand(e.substr(6, e.size() - 7), lineno);
                } else if (e.rfind("rand(", 0) == 0 && e.back() == ')') {
                    if (policy.rand_mode != RandMode::rand_general)
                        throw policy_violation("rand not in the declared op set");
                    st.instr.op = Opcode::rand_gen;
                    st.instr.a = parse_operand(e.substr(5, e.size() - 6), lineno);
                } else if (e.size() > 1 && e[0] == '~') {
                    st.instr.op = Opcode::prim;
                    st.instr.prim = PrimOp::bnot;
                    st.instr.a = parse_operand(e.substr(1), lineno);
                } else {
                    st.instr.op = Opcode::assign;
                    st.instr.a = parse_operand(e, lineno);
                }
            } else if (toks.size() == 4 && toks[2] == "~") {
                st.instr.op = Opcode::prim;
                st.instr.prim = PrimOp::bnot;
                st.instr.a = parse_operand(toks[3], lineno);
            } else if (toks.size() == 5) {
                auto op = binop_token(toks[3]);
                if (!op) throw syntax_error(lineno, "unknown operator '" + toks[3] + "'");
                if (!policy.allows(*op))
                    throw policy_violation("operation '" + std::string(prim_name(*op)) +
                                           "' not in the declared op set");
                st.instr.op = Opcode::prim;
                st.instr.prim = *op;
                st.instr.a = parse_operand(toks[2], lineno);
                st.instr.b = parse_operand(toks[4], lineno);
            } else {
                throw syntax_error(lineno, "malformed assignment");
            }
        } else {
            throw syntax_error(lineno, "unrecognized statement '" + toks[0] + "'");
        }

        for (auto& name : pending_labels) label_to_stmt[name] = stmts.size();
        pending_labels.clear();
        stmts.push_back(st);
    }
    if (!saw_header) throw syntax_error(1, "expected 'op' policy header");
    for (auto& name : pending_labels) label_to_stmt[name] = stmts.size();

    // Scratch registers for ble expansions sit just above the largest
    // direct register the program mentions.
    std::uint64_t max_reg = 0;
    bool any_reg = false;
    bool uses_indirect = false;
    auto scan_operand = [&](const Operand& o) {
        if (o.kind == Operand::Kind::direct) {
            max_reg = std::max(max_reg, o.reg);
            any_reg = true;
        } else if (o.kind == Operand::Kind::indirect) {
            max_reg = std::max(max_reg, o.reg);
            any_reg = true;
            uses_indirect = true;
        }
    };
    for (const auto& st : stmts) {
        if (st.kind == Stmt::Kind::ble) {
            scan_operand(st.a);
            scan_operand(st.b);
        } else {
            scan_operand(st.instr.dst);
            scan_operand(st.instr.a);
            scan_operand(st.instr.b);
        }
    }
    std::uint64_t scratch = any_reg ? max_reg + 1 : 1;

    // Expansion offsets, then emit with branch targets patched.
    std::vector<std::size_t> stmt_start(stmts.size() + 1, 0);
    std::size_t at = 0;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
        stmt_start[i] = at;
        at += stmts[i].kind == Stmt::Kind::ble ? kBleExpansionLength : 1;
    }
    stmt_start[stmts.size()] = at;

    auto resolve = [&](std::size_t label_id) {
        const auto& [name, line] = label_refs[label_id];
        auto it = label_to_stmt.find(name);
        if (it == label_to_stmt.end())
            throw syntax_error(line, "undefined label '" + name + "'");
        return stmt_start[it->second];
    };

    Program prog;
    prog.policy = policy;
    for (const auto& st : stmts) {
        if (st.kind == Stmt::Kind::instr) {
            Instruction ins = st.instr;
            if (st.has_label) ins.target = resolve(st.instr.op == Opcode::jump
                                                       ? st.instr.target
                                                       : st.label_id);
            prog.instructions.push_back(ins);
            continue;
        }

        // ble a b L: the two-case a<=b test of the redundant-ops
        // construction, spelled with core operations plus beq.
        std::size_t base = prog.instructions.size();
        std::size_t target = resolve(st.label_id);
        auto R = [](std::uint64_t r) { return Operand::direct(r); };
        std::uint64_t s0 = scratch, s1 = scratch + 1, s2 = scratch + 2,
                      s3 = scratch + 3, s4 = scratch + 4, s5 = scratch + 5;
        auto mov = [&](std::uint64_t d, Operand src) {
            prog.instructions.push_back({Opcode::assign, PrimOp::add, R(d), src, {}, 0});
        };
        auto op2 = [&](std::uint64_t d, PrimOp p, Operand x, Operand y) {
            prog.instructions.push_back({Opcode::prim, p, R(d), x, y, 0});
        };
        auto beq = [&](Operand x, Operand y, std::size_t t) {
            prog.instructions.push_back({Opcode::branch_eq, PrimOp::add, {}, x, y, t});
        };
        auto jmp = [&](std::size_t t) {
            prog.instructions.push_back({Opcode::jump, PrimOp::add, {}, {}, {}, t});
        };
        mov(s0, st.a);                                          // base+0
        mov(s1, st.b);                                          // base+1
        op2(s2, PrimOp::bnot, R(s0), {});                       // base+2
        op2(s2, PrimOp::add, R(s0), R(s2));                     // base+3  SET(a)
        op2(s3, PrimOp::bnot, R(s1), {});                       // base+4
        op2(s3, PrimOp::add, R(s1), R(s3));                     // base+5  SET(b)
        op2(s4, PrimOp::bor, R(s2), R(s3));                     // base+6
        beq(R(s4), R(s2), base + 9);                            // base+7
        jmp(target);                                            // base+8  SET(b) longer
        beq(R(s2), R(s3), base + 11);                           // base+9
        jmp(base + 16);                                         // base+10 SET(a) longer
        op2(s4, PrimOp::bnot, R(s1), {});                       // base+11
        op2(s4, PrimOp::add, R(s0), R(s4));                     // base+12 a + bnot(b)
        op2(s5, PrimOp::add, R(s3), Operand::lit(true));        // base+13 SET(b)+1
        op2(s4, PrimOp::band, R(s4), R(s5));                    // base+14
        beq(R(s4), Operand::lit(false), target);                // base+15
    }

    // Final register accounting over the emitted instructions.
    max_reg = 0;
    any_reg = false;
    for (const auto& ins : prog.instructions) {
        for (const Operand* o : {&ins.dst, &ins.a, &ins.b}) {
            if (o->kind == Operand::Kind::direct || o->kind == Operand::Kind::indirect) {
                max_reg = std::max(max_reg, o->reg);
                any_reg = true;
            }
        }
    }
    prog.uses_indirect = uses_indirect;
    if (!uses_indirect)
        prog.max_static_register = any_reg ? max_reg : 0;
    return prog;
}

// Renders a program back to assembly text. Branch targets get synthetic
// labels; ble expansions are emitted as their core instructions.
inline std::string serialize_program(const Program& p) {
    std::ostringstream os;
    os << "op +,<<,bool";
    if (p.policy.monus) os << ",-.";
    if (p.policy.mul) os << ",*";
    if (p.policy.exactdiv) os << ",/";
    if (p.policy.intdiv) os << ",//";
    if (p.policy.shr) os << ",>>";
    if (p.policy.rand_mode == RandMode::rand_pow2) os << ",rand2";
    if (p.policy.rand_mode == RandMode::rand_general) os << ",rand2,rand";
    os << "\n";

    std::set<std::size_t> targets;
    for (const auto& ins : p.instructions)
        if (ins.op == Opcode::jump || ins.op == Opcode::branch_eq)
            targets.insert(ins.target);

    auto label = [](std::size_t i) { return "L" + std::to_string(i); };
    auto opnd = [](const Operand& o) -> std::string {
        switch (o.kind) {
            case Operand::Kind::lit0: return "0";
            case Operand::Kind::lit1: return "1";
            case Operand::Kind::direct: return "R" + std::to_string(o.reg);
            case Operand::Kind::indirect: return "R@" + std::to_string(o.reg);
        }
        return "?";
    };

    for (std::size_t i = 0; i < p.instructions.size(); ++i) {
        if (targets.count(i)) os << label(i) << ":\n";
        const auto& ins = p.instructions[i];
        switch (ins.op) {
            case Opcode::assign:
                os << opnd(ins.dst) << " <= " << opnd(ins.a) << "\n";
                break;
            case Opcode::prim:
                if (ins.prim == PrimOp::bnot)
                    os << opnd(ins.dst) << " <= ~" << opnd(ins.a) << "\n";
                else
                    os << opnd(ins.dst) << " <= " << opnd(ins.a) << " "
                       << prim_name(ins.prim) << " " << opnd(ins.b) << "\n";
                break;
            case Opcode::rand_pow2:
                os << opnd(ins.dst) << " <= rand2(" << opnd(ins.a) << ")\n";
                break;
            case Opcode::rand_gen:
                os << opnd(ins.dst) << " <= rand(" << opnd(ins.a) << ")\n";
                break;
            case Opcode::jump:
                os << "jmp " << label(ins.target) << "\n";
                break;
            case Opcode::branch_eq:
                os << "beq " << opnd(ins.a) << " " << opnd(ins.b) << " "
                   << label(ins.target) << "\n";
                break;
            case Opcode::halt: os << "halt\n"; break;
            case Opcode::halt_accept: os << "accept\n"; break;
            case Opcode::halt_reject: os << "reject\n"; break;
        }
    }
    if (targets.count(p.instructions.size()))
        os << label(p.instructions.size()) << ":\nhalt\n";
    return os.str();
}

}  // namespace pelram
