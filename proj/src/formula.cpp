#include "svyglm/formula.hpp"

#include <cctype>
#include <string>

#include "svyglm/error.hpp"

namespace svyglm {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    ModelSpec parse() {
        ModelSpec spec;
        spec.response = name();
        expect('~');
        bool first = true;
        for (;;) {
            skip_ws();
            if (at_end()) {
                if (first) fail("expected a term after '~'");
                break;
            }
            char sign = '+';
            if (!first || peek() == '-' || peek() == '+') {
                if (peek() != '+' && peek() != '-') fail("expected '+' or '-'");
                sign = s_[pos_++];
            }
            first = false;
            item(spec, sign == '-');
        }
        for (const auto& t : spec.terms)
            if (term_column(t) == spec.response)
                fail("response '" + spec.response + "' also appears as a term");
        return spec;
    }

private:
    void item(ModelSpec& spec, bool negated) {
        skip_ws();
        if (peek() == '1' || peek() == '0') {
            const char c = s_[pos_++];
            if (!at_end() && is_name_char(peek())) fail("invalid token starting with a digit");
            // "+1" keeps, "-1" and "+0" drop the intercept.
            spec.intercept = (c == '1') != negated;
            return;
        }
        if (negated) fail("only the intercept can be removed with '-'");
        std::string head = name();
        skip_ws();
        if (!at_end() && peek() == '(') {
            ++pos_;
            if (head == "C") {
                term::Categorical t{name(), std::nullopt};
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    if (name() != "ref") fail("expected 'ref=' in C()");
                    expect('=');
                    t.reference = level();
                }
                expect(')');
                spec.terms.emplace_back(std::move(t));
            } else if (head == "center") {
                term::Centered t{name(), true};
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    const std::string mode = name();
                    if (mode == "unweighted")
                        t.weighted = false;
                    else if (mode != "weighted")
                        fail("center() accepts 'weighted' or 'unweighted', got '" + mode + "'");
                }
                expect(')');
                spec.terms.emplace_back(std::move(t));
            } else {
                fail("unknown function '" + head + "'");
            }
            return;
        }
        spec.terms.emplace_back(term::Numeric{std::move(head)});
    }

    std::string name() {
        skip_ws();
        if (!at_end() && peek() == '`') {
            const auto end = s_.find('`', pos_ + 1);
            if (end == std::string_view::npos) fail("unterminated back-quoted name");
            std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
            pos_ = end + 1;
            if (out.empty()) fail("empty name");
            return out;
        }
        const std::size_t start = pos_;
        while (!at_end() && is_name_char(peek())) ++pos_;
        if (pos_ == start) fail("expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string level() {
        skip_ws();
        if (!at_end() && (peek() == '"' || peek() == '\'')) {
            const char q = s_[pos_];
            const auto end = s_.find(q, pos_ + 1);
            if (end == std::string_view::npos) fail("unterminated quoted level");
            std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
            pos_ = end + 1;
            return out;
        }
        const std::size_t start = pos_;
        while (!at_end() && peek() != ')') ++pos_;
        std::string_view v = s_.substr(start, pos_ - start);
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
        if (v.empty()) fail("empty reference level");
        return std::string(v);
    }

    void expect(char c) {
        skip_ws();
        if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    static bool is_name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Formula,
                    "formula '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + msg);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

ModelSpec parse_formula(std::string_view text) { return Parser(text).parse(); }

}  // namespace svyglm
