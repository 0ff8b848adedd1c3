#include "tr/lang/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

namespace tr::lang {

namespace {

enum class Tok {
    Ident,
    Number,
    String,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Arrow,     // ->
    FatArrow,  // =>
    EqEq,      // ==
    Slash,
    Minus,
    End,
};

const char* describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Comma: return "','";
        case Tok::Semi: return "';'";
        case Tok::Colon: return "':'";
        case Tok::Arrow: return "'->'";
        case Tok::FatArrow: return "'=>'";
        case Tok::EqEq: return "'=='";
        case Tok::Slash: return "'/'";
        case Tok::Minus: return "'-'";
        case Tok::End: return "end of input";
    }
    return "token";
}

enum class Suffix { None, Deg, Rad };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier name or decoded string literal
    double number = 0.0;
    Suffix suffix = Suffix::None;
    SourceSpan span;
};

const std::set<std::string, std::less<>> kKeywords = {
    "prog", "tree", "node", "root", "cost", "T", "nil", "not", "and", "or", "true", "false"};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Thrown internally to abandon the parse at the first syntax error.
struct Abort {};

class Lexer {
  public:
    Lexer(std::string_view src, Diagnostics& diags) : src_(src), diags_(diags) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End) break;
        }
        return out;
    }

  private:
    std::string_view src_;
    Diagnostics& diags_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    SourceSpan begin_span() const { return SourceSpan{pos_, 0, line_, col_}; }

    Token finish(Token t, SourceSpan start) {
        start.length = pos_ - start.offset;
        t.span = start;
        return t;
    }

    [[noreturn]] void fail(SourceSpan at, std::string message) {
        at.length = std::max<std::size_t>(at.length, 1);
        if (at.offset + at.length > src_.size()) at.length = src_.size() - std::min(at.offset, src_.size());
        diags_.push_back({DiagnosticKind::SyntaxError, at, std::move(message)});
        throw Abort{};
    }

    Token next() {
        SourceSpan start = begin_span();
        Token t;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return finish(t, start);
        }
        char c = peek();
        if (is_ident_start(c)) {
            while (pos_ < src_.size()) {
                char d = peek();
                if (is_ident_char(d)) {
                    advance();
                } else if (d == '-' && is_ident_char(peek(1))) {
                    advance();
                } else {
                    break;
                }
            }
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(start.offset, pos_ - start.offset));
            return finish(t, start);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            return lex_number(start);
        }
        if (c == '"') return lex_string(start);
        advance();
        switch (c) {
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case '{': t.kind = Tok::LBrace; break;
            case '}': t.kind = Tok::RBrace; break;
            case ',': t.kind = Tok::Comma; break;
            case ';': t.kind = Tok::Semi; break;
            case ':': t.kind = Tok::Colon; break;
            case '/': t.kind = Tok::Slash; break;
            case '-':
                if (peek() == '>') {
                    advance();
                    t.kind = Tok::Arrow;
                } else {
                    t.kind = Tok::Minus;
                }
                break;
            case '=':
                if (peek() == '>') {
                    advance();
                    t.kind = Tok::FatArrow;
                } else if (peek() == '=') {
                    advance();
                    t.kind = Tok::EqEq;
                } else {
                    fail(start, "unexpected character '='");
                }
                break;
            default:
                fail(start, std::string("unexpected character '") + c + "'");
        }
        return finish(t, start);
    }

    Token lex_number(SourceSpan start) {
        auto digits = [&] {
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        };
        digits();
        if (peek() == '.') {
            advance();
            digits();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            advance();
            if (peek() == '+' || peek() == '-') advance();
            digits();
        }
        Token t;
        t.kind = Tok::Number;
        std::string_view text = src_.substr(start.offset, pos_ - start.offset);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), t.number);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            SourceSpan s = start;
            s.length = text.size();
            fail(s, "malformed number");
        }
        auto suffix_is = [&](std::string_view word) {
            return src_.substr(pos_, word.size()) == word && !is_ident_char(peek(word.size())) &&
                   !(peek(word.size()) == '-' && is_ident_char(peek(word.size() + 1)));
        };
        if (suffix_is("deg")) {
            for (int i = 0; i < 3; ++i) advance();
            t.suffix = Suffix::Deg;
        } else if (suffix_is("rad")) {
            for (int i = 0; i < 3; ++i) advance();
            t.suffix = Suffix::Rad;
        } else if (is_ident_start(peek())) {
            fail(begin_span(), "unexpected suffix after number");
        }
        return finish(t, start);
    }

    Token lex_string(SourceSpan start) {
        advance();  // opening quote
        Token t;
        t.kind = Tok::String;
        for (;;) {
            if (pos_ >= src_.size() || peek() == '\n') fail(start, "unterminated string literal");
            char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                SourceSpan esc = begin_span();
                advance();
                if (pos_ >= src_.size()) fail(start, "unterminated string literal");
                char e = peek();
                advance();
                switch (e) {
                    case '"': t.text += '"'; break;
                    case '\\': t.text += '\\'; break;
                    case 'n': t.text += '\n'; break;
                    case 't': t.text += '\t'; break;
                    default:
                        esc.length = 2;
                        diags_.push_back({DiagnosticKind::UnknownEscape, esc,
                                          std::string("unknown escape sequence '\\") + e + "'"});
                }
                continue;
            }
            t.text += c;
            advance();
        }
        return finish(t, start);
    }
};

SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
    SourceSpan s = a;
    s.length = b.offset + b.length - a.offset;
    return s;
}

class Parser {
  public:
    Parser(std::vector<Token> tokens, Diagnostics& diags) : toks_(std::move(tokens)), diags_(diags) {}

    ProgramLibrary library() {
        ProgramLibrary lib;
        while (!at(Tok::End)) declaration(lib);
        resolve_calls(lib);
        return lib;
    }

    ExprPtr lone_expr() {
        ExprPtr e = or_expr();
        expect(Tok::End, "end of expression");
        return e;
    }

    ActionTerm lone_action() {
        ActionTerm a = action();
        expect(Tok::End, "end of action");
        return a;
    }

    static void resolve(ActionTerm& a, const ProgramLibrary& lib) {
        if (a.kind == ActionTerm::Kind::Nil) return;
        a.kind = lib.has_callable(a.name) ? ActionTerm::Kind::ProgramCall : ActionTerm::Kind::Primitive;
    }

  private:
    std::vector<Token> toks_;
    Diagnostics& diags_;
    std::size_t i_ = 0;
    SourceSpan last_{};

    const Token& cur() const { return toks_[i_]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_word(std::string_view w) const { return at(Tok::Ident) && cur().text == w; }

    Token take() {
        Token t = toks_[i_];
        if (t.kind != Tok::End) ++i_;
        last_ = t.span;
        return t;
    }

    [[noreturn]] void syntax_error(const std::string& expected) {
        std::string found = cur().kind == Tok::Ident ? "'" + cur().text + "'" : describe(cur().kind);
        diags_.push_back({DiagnosticKind::SyntaxError, cur().span,
                          "expected " + expected + ", found " + found});
        throw Abort{};
    }

    Token expect(Tok k, const std::string& what) {
        if (!at(k)) syntax_error(what);
        return take();
    }

    void expect_word(std::string_view w) {
        if (!at_word(w)) syntax_error("'" + std::string(w) + "'");
        take();
    }

    Token name(const std::string& what) {
        if (!at(Tok::Ident) || kKeywords.count(cur().text) != 0) syntax_error(what);
        return take();
    }

    void duplicate(const SourceSpan& span, const std::string& what) {
        diags_.push_back({DiagnosticKind::DuplicateName, span, "duplicate " + what});
    }

    std::vector<std::string> params() {
        std::vector<std::string> out;
        std::set<std::string> seen;
        expect(Tok::LParen, "'('");
        if (!at(Tok::RParen)) {
            do {
                Token p = name("parameter name");
                if (!seen.insert(p.text).second) duplicate(p.span, "parameter '" + p.text + "'");
                out.push_back(p.text);
            } while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RParen, "')'");
        return out;
    }

    void declaration(ProgramLibrary& lib) {
        if (at_word("prog")) {
            program(lib);
        } else if (at_word("tree")) {
            tree(lib);
        } else if (at_word("primitive")) {
            take();
            signatures(lib.primitive_decls, "primitive");
        } else if (at_word("sense")) {
            take();
            signatures(lib.env_decls, "sense symbol");
        } else {
            syntax_error("'prog', 'tree', 'primitive' or 'sense'");
        }
    }

    void signatures(std::map<std::string, Declaration>& into, const std::string& what) {
        do {
            Token n = name(what + " name");
            expect(Tok::Slash, "'/'");
            Token a = expect(Tok::Number, "arity");
            if (a.suffix != Suffix::None || a.number < 0 || a.number != std::floor(a.number) || a.number > 64) {
                diags_.push_back({DiagnosticKind::SyntaxError, a.span, "arity must be a small non-negative integer"});
                throw Abort{};
            }
            SourceSpan s = join(n.span, a.span);
            if (!into.emplace(n.text, Declaration{static_cast<std::size_t>(a.number), s}).second) {
                duplicate(n.span, what + " '" + n.text + "'");
            }
        } while (at(Tok::Comma) && (take(), true));
        expect(Tok::Semi, "';'");
    }

    bool claim_name(ProgramLibrary& lib, const Token& n) {
        if (lib.has_callable(n.text)) {
            duplicate(n.span, "program or tree '" + n.text + "'");
            return false;
        }
        lib.order.push_back(n.text);
        return true;
    }

    void program(ProgramLibrary& lib) {
        Token kw = take();
        Token n = name("program name");
        TRProgram p;
        p.name = n.text;
        p.params = params();
        expect(Tok::LBrace, "'{'");
        while (!at(Tok::RBrace)) {
            if (at(Tok::End)) syntax_error("'}'");
            Rule r;
            SourceSpan start = cur().span;
            r.condition = or_expr();
            expect(Tok::Arrow, "'->'");
            r.action = action();
            expect(Tok::Semi, "';'");
            r.span = join(start, last_);
            p.rules.push_back(std::move(r));
        }
        take();
        p.span = join(kw.span, last_);
        if (claim_name(lib, n)) lib.programs.emplace(p.name, std::move(p));
    }

    void tree(ProgramLibrary& lib) {
        Token kw = take();
        Token n = name("tree name");
        TRTree t;
        t.name = n.text;
        t.params = params();
        expect(Tok::LBrace, "'{'");
        std::set<std::string> ids;
        while (!at(Tok::RBrace)) {
            TreeNode node;
            SourceSpan start = cur().span;
            Token id_tok;
            if (at_word("root")) {
                id_tok = take();
                node.id = kRootId;
                expect(Tok::Colon, "':'");
                node.condition = or_expr();
            } else if (at_word("node")) {
                take();
                id_tok = name("node id");
                node.id = id_tok.text;
                expect(Tok::Colon, "':'");
                node.condition = or_expr();
                expect(Tok::Comma, "','");
                node.action_to_parent = action();
                expect(Tok::FatArrow, "'=>'");
                if (at_word("root")) {
                    take();
                    node.parent = kRootId;
                } else {
                    node.parent = name("parent node id").text;
                }
                if (at(Tok::Comma)) {
                    take();
                    expect_word("cost");
                    Token c = expect(Tok::Number, "arc cost");
                    if (c.suffix != Suffix::None) syntax_error_at(c.span, "arc cost must be a plain number");
                    node.arc_cost = c.number;
                }
            } else {
                syntax_error("'root', 'node' or '}'");
            }
            expect(Tok::Semi, "';'");
            node.span = join(start, last_);
            node.decl_index = t.nodes.size();
            if (!ids.insert(node.id).second) duplicate(id_tok.span, "node '" + node.id + "'");
            t.nodes.push_back(std::move(node));
        }
        take();
        t.span = join(kw.span, last_);
        if (claim_name(lib, n)) lib.trees.emplace(t.name, std::move(t));
    }

    [[noreturn]] void syntax_error_at(const SourceSpan& s, std::string message) {
        diags_.push_back({DiagnosticKind::SyntaxError, s, std::move(message)});
        throw Abort{};
    }

    ActionTerm action() {
        ActionTerm a;
        SourceSpan start = cur().span;
        if (at_word("nil")) {
            take();
            a.span = start;
            return a;
        }
        if (at(Tok::LBrace)) {
            // Parallel action sets are outside the language; skip the set and report it.
            int depth = 0;
            do {
                if (at(Tok::LBrace)) ++depth;
                if (at(Tok::RBrace)) --depth;
                if (at(Tok::End)) syntax_error("'}'");
                take();
            } while (depth > 0);
            diags_.push_back({DiagnosticKind::NotSupported, join(start, last_),
                              "parallel action sets are not supported"});
            a.span = join(start, last_);
            return a;
        }
        Token n = name("action");
        a.kind = ActionTerm::Kind::Primitive;  // resolved after the whole file is read
        a.name = n.text;
        if (at(Tok::LParen)) a.args = arguments();
        a.span = join(start, last_);
        return a;
    }

    std::vector<ExprPtr> arguments() {
        std::vector<ExprPtr> args;
        expect(Tok::LParen, "'('");
        if (!at(Tok::RParen)) {
            do {
                args.push_back(or_expr());
            } while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RParen, "')'");
        return args;
    }

    ExprPtr or_expr() {
        SourceSpan start = cur().span;
        std::vector<ExprPtr> ops{and_expr()};
        while (at_word("or")) {
            take();
            ops.push_back(and_expr());
        }
        if (ops.size() == 1) return ops.front();
        return make_expr(expr::Or{std::move(ops)}, join(start, last_));
    }

    ExprPtr and_expr() {
        SourceSpan start = cur().span;
        std::vector<ExprPtr> ops{not_expr()};
        while (at_word("and")) {
            take();
            ops.push_back(not_expr());
        }
        if (ops.size() == 1) return ops.front();
        return make_expr(expr::And{std::move(ops)}, join(start, last_));
    }

    ExprPtr not_expr() {
        if (at_word("not")) {
            SourceSpan start = take().span;
            ExprPtr operand = not_expr();
            return make_expr(expr::Not{std::move(operand)}, join(start, last_));
        }
        SourceSpan start = cur().span;
        ExprPtr lhs = primary();
        if (at(Tok::EqEq)) {
            take();
            ExprPtr rhs = primary();
            return make_expr(expr::Near{std::move(lhs), std::move(rhs), std::nullopt}, join(start, last_));
        }
        return lhs;
    }

    static std::optional<double> literal_number(const ExprPtr& e) {
        if (const auto* n = std::get_if<expr::Number>(&e->node)) return n->value;
        return std::nullopt;
    }

    ExprPtr number_literal(const Token& t, bool negate, SourceSpan span) {
        double v = negate ? -t.number : t.number;
        switch (t.suffix) {
            case Suffix::Deg: return make_expr(expr::Angle{normalize_angle(v * std::numbers::pi / 180.0)}, span);
            case Suffix::Rad: return make_expr(expr::Angle{normalize_angle(v)}, span);
            case Suffix::None: break;
        }
        return make_expr(expr::Number{v}, span);
    }

    ExprPtr primary() {
        SourceSpan start = cur().span;
        if (at(Tok::Number)) {
            Token t = take();
            return number_literal(t, false, t.span);
        }
        if (at(Tok::Minus)) {
            take();
            Token t = expect(Tok::Number, "number after '-'");
            return number_literal(t, true, join(start, t.span));
        }
        if (at(Tok::String)) {
            Token t = take();
            return make_expr(expr::Str{t.text}, t.span);
        }
        if (at(Tok::LParen)) {
            take();
            ExprPtr inner = or_expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (at_word("T") || at_word("true")) {
            take();
            return make_expr(expr::True{}, start);
        }
        if (at_word("false")) {
            take();
            return make_expr(expr::Not{make_expr(expr::True{}, start)}, start);
        }
        Token n = name("expression");
        if (!at(Tok::LParen)) return make_expr(expr::Var{n.text}, n.span);
        std::vector<ExprPtr> args = arguments();
        SourceSpan span = join(start, last_);
        if (n.text == "equal" && args.size() == 2) {
            return make_expr(expr::Near{args[0], args[1], std::nullopt}, span);
        }
        if (n.text == "near" && args.size() == 4) {
            auto in = literal_number(args[2]);
            auto out = literal_number(args[3]);
            if (!in || !out) syntax_error_at(span, "near() tolerances must be number literals");
            if (!(*in > 0.0) || !(*out >= *in)) {
                diags_.push_back({DiagnosticKind::InvalidTolerance, span,
                                  "near() requires exit >= enter > 0"});
            }
            return make_expr(expr::Near{args[0], args[1], Tolerance{*in, *out}}, span);
        }
        if (n.text == "point" && args.size() == 2) {
            auto x = literal_number(args[0]);
            auto y = literal_number(args[1]);
            if (x && y) return make_expr(expr::Point{*x, *y}, span);
        }
        return make_expr(expr::Call{n.text, std::move(args)}, span);
    }

    void resolve_calls(ProgramLibrary& lib) {
        for (auto& [_, p] : lib.programs) {
            for (auto& r : p.rules) resolve(r.action, lib);
        }
        for (auto& [_, t] : lib.trees) {
            for (auto& n : t.nodes) {
                if (n.action_to_parent) resolve(*n.action_to_parent, lib);
            }
        }
    }
};

template <typename F>
auto run_parser(std::string_view source, F&& body) {
    Diagnostics diags;
    try {
        Lexer lexer(source, diags);
        Parser parser(lexer.run(), diags);
        auto result = body(parser);
        if (!diags.empty()) throw ParseError(std::move(diags));
        return result;
    } catch (const Abort&) {
        throw ParseError(std::move(diags));
    }
}

}  // namespace

ProgramLibrary parse(std::string_view source) {
    return run_parser(source, [](Parser& p) { return p.library(); });
}

ExprPtr parse_expr(std::string_view source) {
    return run_parser(source, [](Parser& p) { return p.lone_expr(); });
}

ActionTerm parse_action(std::string_view source, const ProgramLibrary& lib) {
    return run_parser(source, [&](Parser& p) {
        ActionTerm a = p.lone_action();
        Parser::resolve(a, lib);
        return a;
    });
}

}  // namespace tr::lang
