#pragma once

// Line-oriented text formats: instances, update scripts and candidate sets.
// The constraint and query grammars live next to their ASTs.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cqa/error.hpp"
#include "cqa/model.hpp"

namespace cqa {

enum class TokenKind { identifier, integer, quoted, punct, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    std::size_t column = 0;  // 1-based
};

/// Tokenizes a single line. `#` starts a comment that runs to end of line.
class Lexer {
public:
    Lexer(std::string_view line, std::size_t line_no) : line_no_(line_no) { tokenize(line); }

    const Token& peek(std::size_t ahead = 0) const {
        return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : tokens_.back();
    }
    Token next() {
        Token t = peek();
        if (pos_ < tokens_.size() - 1) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == TokenKind::end; }

    bool accept(std::string_view punct) {
        if (peek().kind == TokenKind::punct && peek().text == punct) {
            next();
            return true;
        }
        return false;
    }
    bool accept_word(std::string_view word) {
        if (peek().kind == TokenKind::identifier && peek().text == word) {
            next();
            return true;
        }
        return false;
    }
    void expect(std::string_view punct) {
        if (!accept(punct)) fail("expected '" + std::string(punct) + "'");
    }
    std::string expect_identifier(const char* what = "identifier") {
        if (peek().kind != TokenKind::identifier) fail(std::string("expected ") + what);
        return next().text;
    }
    std::size_t expect_index() {
        if (peek().kind != TokenKind::integer || peek().text.front() == '-') fail("expected a non-negative integer");
        return static_cast<std::size_t>(std::stoull(next().text));
    }
    void expect_end() {
        if (!at_end()) fail("unexpected '" + peek().text + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(msg, line_no_, peek().column);
    }

    std::size_t line_no() const noexcept { return line_no_; }

private:
    void tokenize(std::string_view s) {
        std::size_t i = 0;
        while (i < s.size()) {
            char c = s[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (c == '#') break;
            Token tok;
            tok.column = i + 1;
            if (detail::is_ident_start(c)) {
                std::size_t j = i;
                while (j < s.size() && detail::is_ident_char(s[j])) ++j;
                tok.kind = TokenKind::identifier;
                tok.text = std::string(s.substr(i, j - i));
                i = j;
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])) &&
                        !after_operand())) {
                std::size_t j = i + 1;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                tok.kind = TokenKind::integer;
                tok.text = std::string(s.substr(i, j - i));
                i = j;
            } else if (c == '\'' || c == '"') {
                std::size_t j = i + 1;
                std::string val;
                while (j < s.size() && s[j] != c) {
                    if (s[j] == '\\' && j + 1 < s.size()) ++j;
                    val += s[j++];
                }
                if (j >= s.size()) throw SyntaxError("unterminated quoted constant", line_no_, i + 1);
                tok.kind = TokenKind::quoted;
                tok.text = std::move(val);
                i = j + 1;
            } else {
                static constexpr std::string_view two[] = {":-", "->", "!=", "<=", ">="};
                tok.kind = TokenKind::punct;
                bool matched = false;
                for (auto p : two) {
                    if (s.substr(i, 2) == p) {
                        tok.text = std::string(p);
                        i += 2;
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    static constexpr std::string_view one = "(),.?:@/=<>";
                    if (one.find(c) == std::string_view::npos)
                        throw SyntaxError(std::string("unexpected character '") + c + "'", line_no_, i + 1);
                    tok.text = std::string(1, c);
                    ++i;
                }
            }
            tokens_.push_back(std::move(tok));
        }
        tokens_.push_back(Token{TokenKind::end, "end of line", s.size() + 1});
    }

    // A '-' directly after an operand is never a sign; it only appears in '->'.
    bool after_operand() const {
        if (tokens_.empty()) return false;
        const auto& t = tokens_.back();
        return t.kind != TokenKind::punct || t.text == ")";
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_no_;
};

/// Splits text into lines, keeping 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t line = 1;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view l = text.substr(start, end - start);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        out.emplace_back(line++, l);
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

inline Constant parse_constant(Lexer& lex) {
    const Token& t = lex.peek();
    switch (t.kind) {
        case TokenKind::integer: {
            auto tok = lex.next();
            try {
                return Constant(static_cast<std::int64_t>(std::stoll(tok.text)));
            } catch (const std::out_of_range&) {
                throw SyntaxError("integer out of range", lex.line_no(), tok.column);
            }
        }
        case TokenKind::quoted:
        case TokenKind::identifier:
            return Constant(lex.next().text);
        default:
            lex.fail("expected a constant");
    }
}

/// `R(c1,...,cn)` with constant arguments.
inline DbTuple parse_ground_tuple(Lexer& lex) {
    DbTuple t;
    t.relation = lex.expect_identifier("relation name");
    lex.expect("(");
    do {
        t.args.push_back(parse_constant(lex));
    } while (lex.accept(","));
    lex.expect(")");
    return t;
}

inline Weight parse_weight(Lexer& lex) {
    auto num_tok = lex.peek();
    if (num_tok.kind != TokenKind::integer) lex.fail("expected a weight");
    std::int64_t num = std::stoll(lex.next().text);
    std::int64_t den = 1;
    if (lex.accept("/")) {
        if (lex.peek().kind != TokenKind::integer) lex.fail("expected a denominator");
        den = std::stoll(lex.next().text);
        if (den == 0) throw SyntaxError("zero denominator", lex.line_no(), num_tok.column);
    }
    Weight w(num, den);
    if (w <= 0) throw SyntaxError("weights must be positive", lex.line_no(), num_tok.column);
    return w;
}

namespace detail {

inline void declare_or_check(Schema& schema, const DbTuple& t, const Lexer& lex) {
    if (!schema.contains(t.relation)) {
        schema.add_default(t.relation, t.args.size());
        return;
    }
    if (schema.at(t.relation).arity() != t.args.size())
        lex.fail("relation " + t.relation + " has arity " + std::to_string(schema.at(t.relation).arity()));
}

}  // namespace detail

/// Instance text: `relation P/3 (x,y,z)` headers and `P(a,b,c) [@ w]` tuples.
/// A relation used without a header is declared on first use.
inline Instance parse_instance(std::string_view text, Schema schema = {}) {
    struct Pending {
        DbTuple tuple;
        Weight weight;
    };
    std::vector<Pending> pending;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer lex(line, line_no);
        if (lex.at_end()) continue;
        if (lex.peek().text == "relation" && lex.peek(1).kind == TokenKind::identifier) {
            lex.next();
            auto name_col = lex.peek().column;
            RelationDecl decl;
            decl.name = lex.expect_identifier("relation name");
            lex.expect("/");
            std::size_t arity = lex.expect_index();
            if (lex.accept("(")) {
                do {
                    decl.attributes.push_back(lex.expect_identifier("attribute name"));
                } while (lex.accept(","));
                lex.expect(")");
                if (decl.attributes.size() != arity) lex.fail("attribute list does not match arity");
            } else {
                for (std::size_t i = 0; i < arity; ++i) decl.attributes.push_back("a" + std::to_string(i));
            }
            lex.expect_end();
            try {
                schema.add(std::move(decl));
            } catch (const SchemaError& e) {
                throw SyntaxError(e.what(), line_no, name_col);
            }
            continue;
        }
        Pending p{parse_ground_tuple(lex), 1};
        if (lex.accept("@")) p.weight = parse_weight(lex);
        lex.expect_end();
        detail::declare_or_check(schema, p.tuple, lex);
        pending.push_back(std::move(p));
    }
    Instance d(std::move(schema));
    for (auto& p : pending) d.insert(p.tuple, p.weight);
    return d;
}

inline std::string format_instance(const Instance& d) {
    std::string out;
    for (const auto& r : d.schema().relations()) {
        out += "relation " + r.name + "/" + std::to_string(r.arity()) + " (";
        for (std::size_t i = 0; i < r.attributes.size(); ++i) {
            if (i) out += ",";
            out += r.attributes[i];
        }
        out += ")\n";
    }
    for (const auto& [t, w] : d) {
        out += to_string(t);
        if (w != Weight(1)) out += " @ " + to_string(w);
        out += "\n";
    }
    return out;
}

/// Update script: `insert P(a,f,d) [@ w]`, `delete P(a,b,c)`,
/// `change P(a,b,c) attr 1 -> f`.
inline UpdateSequence parse_updates(std::string_view text) {
    UpdateSequence seq;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer lex(line, line_no);
        if (lex.at_end()) continue;
        auto kw = lex.expect_identifier("insert, delete or change");
        if (kw == "insert") {
            InsertOp op{parse_ground_tuple(lex), 1};
            if (lex.accept("@")) op.weight = parse_weight(lex);
            seq.push_back(std::move(op));
        } else if (kw == "delete") {
            seq.push_back(DeleteOp{parse_ground_tuple(lex)});
        } else if (kw == "change") {
            ChangeOp op;
            op.tuple = parse_ground_tuple(lex);
            if (!lex.accept_word("attr")) lex.fail("expected 'attr'");
            op.attribute = lex.expect_index();
            if (op.attribute >= op.tuple.args.size()) lex.fail("attribute index out of range");
            lex.expect("->");
            op.value = parse_constant(lex);
            seq.push_back(std::move(op));
        } else {
            throw SyntaxError("unknown update '" + kw + "'", line_no, 1);
        }
        lex.expect_end();
    }
    return seq;
}

inline std::string format_updates(const UpdateSequence& seq) {
    std::string out;
    for (const auto& op : seq) out += to_string(op) + "\n";
    return out;
}

/// Candidate values, separated by whitespace or commas.
inline std::set<Constant> parse_candidates(std::string_view text) {
    std::set<Constant> out;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer lex(line, line_no);
        while (!lex.at_end()) {
            if (lex.accept(",")) continue;
            out.insert(parse_constant(lex));
        }
    }
    return out;
}

}  // namespace cqa
