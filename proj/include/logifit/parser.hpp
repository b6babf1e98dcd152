#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "formula.hpp"
#include "lexer.hpp"
#include "model.hpp"
#include "space.hpp"

namespace logifit {

struct NamedFormula {
    std::string name;
    FormulaPtr formula;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

    // ---- shared plumbing ----

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool check(Tok k) const { return peek().kind == k; }
    bool match(Tok k) {
        if (!check(k)) return false;
        advance();
        return true;
    }
    const Token& expect(Tok k) {
        if (!check(k)) fail(token_name(k));
        return advance();
    }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input"
                          : t.kind == Tok::Ident || t.kind == Tok::Number ? "'" + t.text + "'"
                          : token_name(t.kind);
        throw ParseError(t.line, t.column, expected, found);
    }
    [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
        throw ParseError(t.line, t.column, msg);
    }
    bool at_ident(const char* word) const {
        return check(Tok::Ident) && peek().text == word;
    }
    std::string expect_ident(const char* what) {
        if (!check(Tok::Ident)) fail(what);
        return advance().text;
    }
    double expect_number() {
        bool neg = match(Tok::Minus);
        if (!check(Tok::Number)) fail("number");
        double v = advance().number;
        return neg ? -v : v;
    }
    bool at_end() const { return check(Tok::End); }

    // ---- arithmetic expressions ----
    // expr := term (('+'|'-') term)*
    // term := factor (('*'|'/') factor)*
    // factor := '-' factor | power
    // power := primary ('^' factor)?
    // primary := NUMBER | IDENT | 'exp' '(' expr ')' | 'log' '(' expr ')' | '(' expr ')'

    ExprPtr parse_expr(const std::set<std::string>* allowed) {
        ExprPtr e = parse_term(allowed);
        while (check(Tok::Plus) || check(Tok::Minus)) {
            Expr::Kind k = advance().kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
            e = Expr::binary(k, e, parse_term(allowed));
        }
        return e;
    }

    ExprPtr parse_term(const std::set<std::string>* allowed) {
        ExprPtr e = parse_factor(allowed);
        while (check(Tok::Star) || check(Tok::Slash)) {
            Expr::Kind k = advance().kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
            e = Expr::binary(k, e, parse_factor(allowed));
        }
        return e;
    }

    ExprPtr parse_factor(const std::set<std::string>* allowed) {
        if (match(Tok::Minus)) {
            ExprPtr inner = parse_factor(allowed);
            // Fold a negated literal so printing round-trips.
            if (inner->kind == Expr::Kind::Constant) return Expr::constant(-inner->value);
            return Expr::unary(Expr::Kind::Neg, inner);
        }
        return parse_power(allowed);
    }

    ExprPtr parse_power(const std::set<std::string>* allowed) {
        ExprPtr base = parse_primary(allowed);
        if (match(Tok::Caret)) return Expr::binary(Expr::Kind::Pow, base, parse_factor(allowed));
        return base;
    }

    ExprPtr parse_primary(const std::set<std::string>* allowed) {
        if (check(Tok::Number)) return Expr::constant(advance().number);
        if (check(Tok::Ident)) {
            const Token& t = peek();
            if ((t.text == "exp" || t.text == "log") && peek(1).kind == Tok::LParen) {
                Expr::Kind k = t.text == "exp" ? Expr::Kind::Exp : Expr::Kind::Log;
                advance();
                expect(Tok::LParen);
                ExprPtr inner = parse_expr(allowed);
                expect(Tok::RParen);
                return Expr::unary(k, inner);
            }
            if (allowed && !allowed->count(t.text))
                fail_at(t, "unknown name '" + t.text + "'");
            return Expr::var(advance().text);
        }
        if (match(Tok::LParen)) {
            ExprPtr e = parse_expr(allowed);
            expect(Tok::RParen);
            return e;
        }
        fail("expression");
    }

    // ---- temporal formulae ----
    // Precedence: ! and the windowed unaries bind tightest, then &, then |,
    // then U (right-associative).

    FormulaPtr parse_formula(const std::set<std::string>* allowed) {
        FormulaPtr lhs = parse_or(allowed);
        if (at_ident("U")) {
            advance();
            auto [a, b] = parse_window();
            FormulaPtr rhs = parse_formula(allowed);
            return Formula::until(a, b, lhs, rhs);
        }
        return lhs;
    }

    FormulaPtr parse_or(const std::set<std::string>* allowed) {
        FormulaPtr e = parse_and(allowed);
        while (match(Tok::Pipe)) e = Formula::disj(e, parse_and(allowed));
        return e;
    }

    FormulaPtr parse_and(const std::set<std::string>* allowed) {
        FormulaPtr e = parse_unary(allowed);
        while (match(Tok::Amp)) e = Formula::conj(e, parse_unary(allowed));
        return e;
    }

    FormulaPtr parse_unary(const std::set<std::string>* allowed) {
        if (match(Tok::Bang)) return Formula::negate(parse_unary(allowed));
        if ((at_ident("F") || at_ident("G")) && peek(1).kind == Tok::LBracket) {
            bool eventually = peek().text == "F";
            advance();
            auto [a, b] = parse_window();
            FormulaPtr sub = parse_unary(allowed);
            return eventually ? Formula::eventually(a, b, sub) : Formula::always(a, b, sub);
        }
        if (at_ident("tt") ) {
            advance();
            return Formula::tt();
        }
        if (check(Tok::LParen)) {
            // Could open a subformula or an arithmetic atom; try the atom
            // first and rewind on failure.
            std::size_t save = pos_;
            try {
                return parse_atom(allowed);
            } catch (const ParseError&) {
                pos_ = save;
            }
            expect(Tok::LParen);
            FormulaPtr f = parse_formula(allowed);
            expect(Tok::RParen);
            return f;
        }
        return parse_atom(allowed);
    }

    FormulaPtr parse_atom(const std::set<std::string>* allowed) {
        ExprPtr l = parse_expr(allowed);
        Cmp c;
        if (match(Tok::Lt)) c = Cmp::Lt;
        else if (match(Tok::Le)) c = Cmp::Le;
        else if (match(Tok::Gt)) c = Cmp::Gt;
        else if (match(Tok::Ge)) c = Cmp::Ge;
        else if (match(Tok::Assign)) c = Cmp::Eq;
        else { fail("comparison operator"); }
        ExprPtr r = parse_expr(allowed);
        return Formula::atomic(l, c, r);
    }

    std::pair<double, double> parse_window() {
        const Token& open = peek();
        expect(Tok::LBracket);
        double a = expect_number();
        expect(Tok::Comma);
        double b = expect_number();
        expect(Tok::RBracket);
        if (a < 0.0) fail_at(open, "temporal window starts before 0");
        if (!(a < b)) fail_at(open, "inverted temporal window [" + std::to_string(a) + ", " +
                                        std::to_string(b) + "]");
        return {a, b};
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// ---- model files ----

class ModelParser : Parser {
public:
    explicit ModelParser(std::string_view src) : Parser(src) {}

    Model parse() {
        std::string kind = expect_ident("'ctmc', 'sde' or 'hybrid'");
        if (kind != "ctmc" && kind != "sde" && kind != "hybrid")
            fail("'ctmc', 'sde' or 'hybrid'");
        std::string name = expect_ident("model name");
        expect(Tok::LBrace);
        kind_ = kind;
        name_ = name;
        while (!check(Tok::RBrace)) parse_decl();
        expect(Tok::RBrace);
        if (!at_end()) fail("end of input");
        return build();
    }

private:
    void parse_decl() {
        const Token& t = peek();
        std::string head = expect_ident("declaration");
        if (head == "species") { require_kind(t, "ctmc"); decl_state(t, species_, species_init_); }
        else if (head == "var") { require_kind(t, "sde", "hybrid"); decl_state(t, vars_, vars_init_); }
        else if (head == "mode") { require_kind(t, "hybrid"); decl_mode(t); }
        else if (head == "const") { decl_const(t); }
        else if (head == "param") { decl_param(t); }
        else if (head == "reaction") { require_kind(t, "ctmc"); decl_reaction(t); }
        else if (head == "drift") { require_kind(t, "sde", "hybrid"); decl_drift(t); }
        else if (head == "noise") { require_kind(t, "sde", "hybrid"); decl_noise(t); }
        else if (head == "rate") { require_kind(t, "hybrid"); decl_rate(t); }
        else fail_at(t, "unknown declaration '" + head + "'");
    }

    void require_kind(const Token& at, const std::string& a, const std::string& b = "") {
        if (kind_ != a && kind_ != b)
            fail_at(at, "'" + at.text + "' declarations are not allowed in a " + kind_ + " model");
    }

    void declare(const Token& at, const std::string& n) {
        if (!declared_.insert(n).second)
            fail_at(at, "duplicate declaration of '" + n + "'");
    }

    void decl_state(const Token& at, std::vector<std::string>& names, std::vector<double>& init) {
        std::string n = expect_ident("name");
        declare(at, n);
        expect(Tok::Assign);
        double v = expect_number();
        if (kind_ == "ctmc") {
            if (v < 0.0 || v != static_cast<double>(static_cast<long long>(v)))
                fail_at(at, "species '" + n + "' needs a non-negative integer initial count");
        }
        expect(Tok::Semi);
        names.push_back(n);
        init.push_back(v);
    }

    void decl_mode(const Token& at) {
        std::string n = expect_ident("name");
        declare(at, n);
        expect(Tok::Assign);
        double v = expect_number();
        if (v != 0.0 && v != 1.0) fail_at(at, "mode '" + n + "' must start at 0 or 1");
        expect(Tok::Semi);
        modes_.push_back(Mode{n, static_cast<int>(v), nullptr, nullptr});
    }

    void decl_const(const Token& at) {
        std::string n = expect_ident("name");
        declare(at, n);
        expect(Tok::Assign);
        double v = expect_number();
        expect(Tok::Semi);
        constants_[n] = v;
    }

    void decl_param(const Token& at) {
        for (;;) {
            std::string n = expect_ident("parameter name");
            declare(at, n);
            params_.push_back(n);
            if (!match(Tok::Comma)) break;
        }
        expect(Tok::Semi);
    }

    // reaction name : side -> side @ rate ;
    void decl_reaction(const Token& at) {
        std::string n = expect_ident("reaction name");
        expect(Tok::Colon);
        std::map<std::string, int> before = parse_side();
        expect(Tok::Arrow);
        std::map<std::string, int> after = parse_side();
        expect(Tok::At);
        ExprPtr rate = parse_expr(&declared_);
        expect(Tok::Semi);
        Reaction r;
        r.name = n;
        r.change.assign(species_.size(), 0);
        for (auto& [sp, count] : before) r.change[species_index(at, sp)] -= count;
        for (auto& [sp, count] : after) r.change[species_index(at, sp)] += count;
        r.rate = rate;
        reactions_.push_back(std::move(r));
    }

    std::size_t species_index(const Token& at, const std::string& n) {
        for (std::size_t i = 0; i < species_.size(); ++i)
            if (species_[i] == n) return i;
        fail_at(at, "unknown species '" + n + "'");
    }

    std::map<std::string, int> parse_side() {
        std::map<std::string, int> out;
        if (check(Tok::Number) && peek().number == 0.0 && peek(1).kind != Tok::Star) {
            advance();
            return out;
        }
        for (;;) {
            int count = 1;
            if (check(Tok::Number)) {
                double v = advance().number;
                if (v < 1.0 || v != static_cast<double>(static_cast<long long>(v)))
                    fail("positive integer stoichiometry");
                count = static_cast<int>(v);
                expect(Tok::Star);
            }
            const Token& t = peek();
            std::string sp = expect_ident("species name");
            species_index(t, sp);
            out[sp] += count;
            if (!match(Tok::Plus)) break;
        }
        return out;
    }

    void decl_drift(const Token& at) {
        std::string n = expect_ident("variable name");
        std::size_t idx = var_index(at, n);
        expect(Tok::Assign);
        ExprPtr e = parse_expr(&declared_);
        expect(Tok::Semi);
        if (drift_.size() < vars_.size()) drift_.resize(vars_.size());
        if (drift_[idx]) fail_at(at, "duplicate drift for '" + n + "'");
        drift_[idx] = e;
    }

    // noise VAR = expr;          diagonal entry, channel named after VAR
    // noise VAR, CHANNEL = expr; entry for VAR on a shared named channel
    void decl_noise(const Token& at) {
        std::string n = expect_ident("variable name");
        std::size_t idx = var_index(at, n);
        std::string channel = n;
        if (match(Tok::Comma)) channel = expect_ident("channel name");
        expect(Tok::Assign);
        ExprPtr e = parse_expr(&declared_);
        expect(Tok::Semi);
        std::size_t ch = 0;
        for (; ch < channels_.size(); ++ch)
            if (channels_[ch] == channel) break;
        if (ch == channels_.size()) channels_.push_back(channel);
        noise_.push_back({idx, ch, e});
    }

    std::size_t var_index(const Token& at, const std::string& n) {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == n) return i;
        fail_at(at, "unknown variable '" + n + "'");
    }

    // rate MODE on->off = expr;  /  rate MODE off->on = expr;
    void decl_rate(const Token& at) {
        std::string n = expect_ident("mode name");
        Mode* mode = nullptr;
        for (Mode& m : modes_)
            if (m.name == n) mode = &m;
        if (!mode) fail_at(at, "unknown mode '" + n + "'");
        std::string from = expect_ident("'on' or 'off'");
        expect(Tok::Arrow);
        std::string to = expect_ident("'on' or 'off'");
        bool on_off = from == "on" && to == "off";
        bool off_on = from == "off" && to == "on";
        if (!on_off && !off_on) fail_at(at, "mode transition must be on->off or off->on");
        expect(Tok::Assign);
        ExprPtr e = parse_expr(&declared_);
        expect(Tok::Semi);
        ExprPtr& slot = on_off ? mode->rate_on_off : mode->rate_off_on;
        if (slot) fail_at(at, "duplicate " + from + "->" + to + " rate for '" + n + "'");
        slot = e;
    }

    Model build() {
        if (kind_ == "ctmc") {
            if (species_.empty())
                throw ValidationError("model '" + name_ + "' declares no species");
            return ReactionNetwork{name_, species_, species_init_, constants_, params_, reactions_};
        }
        SdeSystem sde;
        sde.name = name_;
        sde.vars = vars_;
        sde.initial = vars_init_;
        sde.constants = constants_;
        sde.params = params_;
        if (vars_.empty()) throw ValidationError("model '" + name_ + "' declares no variables");
        drift_.resize(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (!drift_[i])
                throw ValidationError("variable '" + vars_[i] + "' of model '" + name_ +
                                      "' has no drift");
        sde.drift = drift_;
        sde.channels = channels_;
        sde.diffusion.assign(vars_.size(), std::vector<ExprPtr>(channels_.size()));
        for (const auto& [var, ch, e] : noise_) sde.diffusion[var][ch] = e;
        if (kind_ == "sde") return sde;
        for (const Mode& m : modes_) {
            if (!m.rate_on_off || !m.rate_off_on)
                throw ValidationError("mode '" + m.name + "' of model '" + name_ +
                                      "' needs both on->off and off->on rates");
        }
        if (modes_.empty())
            throw ValidationError("hybrid model '" + name_ + "' declares no modes");
        return HybridSystem{name_, std::move(sde), modes_};
    }

    std::string kind_, name_;
    std::vector<std::string> species_, vars_, params_;
    std::vector<double> species_init_, vars_init_;
    std::map<std::string, double> constants_;
    std::vector<Reaction> reactions_;
    std::vector<ExprPtr> drift_;
    std::vector<std::string> channels_;
    std::vector<std::tuple<std::size_t, std::size_t, ExprPtr>> noise_;
    std::vector<Mode> modes_;
    std::set<std::string> declared_;
};

} // namespace detail

inline Model parse_model(std::string_view src) {
    return detail::ModelParser(src).parse();
}

/// Names a formula may reference: state variables (including modes) and model
/// constants. Parameters vary between runs and are excluded.
inline std::set<std::string> formula_symbols(const Model& m) {
    std::vector<std::string> names = model_state_names(m);
    std::set<std::string> out(names.begin(), names.end());
    const std::map<std::string, double>* consts = nullptr;
    if (const auto* rn = std::get_if<ReactionNetwork>(&m)) consts = &rn->constants;
    else if (const auto* sde = std::get_if<SdeSystem>(&m)) consts = &sde->constants;
    else consts = &std::get<HybridSystem>(m).continuous.constants;
    for (const auto& [n, _] : *consts) out.insert(n);
    return out;
}

inline FormulaPtr parse_formula(std::string_view src, const Model& model) {
    detail::Parser p(src);
    std::set<std::string> allowed = formula_symbols(model);
    FormulaPtr f = p.parse_formula(&allowed);
    p.match(Tok::Semi);
    if (!p.at_end()) p.fail("end of input");
    return f;
}

inline FormulaPtr parse_formula(std::string_view src) {
    detail::Parser p(src);
    FormulaPtr f = p.parse_formula(nullptr);
    p.match(Tok::Semi);
    if (!p.at_end()) p.fail("end of input");
    return f;
}

/// Property files: one formula per line, ';'-terminated, optionally prefixed
/// with 'name :'. Unnamed formulae get phi1, phi2, ...
inline std::vector<NamedFormula> parse_properties(std::string_view src, const Model& model) {
    detail::Parser p(src);
    std::set<std::string> allowed = formula_symbols(model);
    std::vector<NamedFormula> out;
    std::set<std::string> used;
    while (!p.at_end()) {
        std::string name;
        if (p.peek().kind == Tok::Ident && p.peek(1).kind == Tok::Colon) {
            name = p.advance().text;
            p.advance();
        }
        FormulaPtr f = p.parse_formula(&allowed);
        p.expect(Tok::Semi);
        if (name.empty()) name = "phi" + std::to_string(out.size() + 1);
        if (!used.insert(name).second)
            throw ValidationError("duplicate property name '" + name + "'");
        out.push_back({std::move(name), std::move(f)});
    }
    if (out.empty()) throw ValidationError("property file contains no formulae");
    return out;
}

/// Space files: 'name in [lo, hi] log|linear;' for free axes (scale defaults
/// to log), 'name = value;' to pin a parameter.
inline ParameterSpace parse_space(std::string_view src) {
    detail::Parser p(src);
    ParameterSpace space;
    std::set<std::string> seen;
    while (!p.at_end()) {
        const Token& at = p.peek();
        std::string name = p.expect_ident("parameter name");
        if (!seen.insert(name).second) p.fail_at(at, "duplicate parameter '" + name + "'");
        if (p.match(Tok::Assign)) {
            double v = p.expect_number();
            p.expect(Tok::Semi);
            space.fixed[name] = v;
            continue;
        }
        if (!p.at_ident("in")) p.fail("'in' or '='");
        p.advance();
        p.expect(Tok::LBracket);
        double lo = p.expect_number();
        p.expect(Tok::Comma);
        double hi = p.expect_number();
        p.expect(Tok::RBracket);
        Scale scale = Scale::Log;
        if (p.at_ident("log")) p.advance();
        else if (p.at_ident("linear")) { p.advance(); scale = Scale::Linear; }
        p.expect(Tok::Semi);
        if (!(lo < hi))
            p.fail_at(at, "parameter '" + name + "': bounds [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "] are not increasing");
        space.axes.push_back(Axis{name, lo, hi, scale});
    }
    space.validate();
    return space;
}

/// Prior files: 'name gamma(shape, mean);' per line.
inline std::map<std::string, GammaPrior> parse_priors(std::string_view src) {
    detail::Parser p(src);
    std::map<std::string, GammaPrior> out;
    while (!p.at_end()) {
        const Token& at = p.peek();
        std::string name = p.expect_ident("parameter name");
        if (out.count(name)) p.fail_at(at, "duplicate prior for '" + name + "'");
        if (!p.at_ident("gamma")) p.fail("'gamma'");
        p.advance();
        p.expect(Tok::LParen);
        double shape = p.expect_number();
        p.expect(Tok::Comma);
        double mean = p.expect_number();
        p.expect(Tok::RParen);
        p.expect(Tok::Semi);
        if (shape <= 0.0 || mean <= 0.0)
            p.fail_at(at, "prior for '" + name + "' needs positive shape and mean");
        out[name] = GammaPrior{shape, mean};
    }
    return out;
}

/// Bare arithmetic expression, mainly for tests and diagnostics.
inline ExprPtr parse_expression(std::string_view src) {
    detail::Parser p(src);
    ExprPtr e = p.parse_expr(nullptr);
    if (!p.at_end()) p.fail("end of input");
    return e;
}

} // namespace logifit
