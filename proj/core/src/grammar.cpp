#include "greenevo/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "greenevo/error.hpp"

namespace greenevo {

namespace {

constexpr std::string_view kDefaultGrammar = R"(# Default search space: sequential dense/dropout stacks trained by gradient descent.
<layer> ::= <dense> | <dense> | <dropout>
<dense> ::= layer:dense [units,int,1,8,256] <activation>
<activation> ::= act:relu | act:sigmoid
<dropout> ::= layer:dropout [rate,float,1,0,0.5]
<learning> ::= learning:gradient-descent [lr,float,1,0.0001,0.1] [batch_size,int,1,16,128]
<middle_point> ::= [middle_point,int,1,0,x]
)";

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool is_ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_identifier(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), is_ident_char);
}

bool is_literal_char(char c)
{
    return is_ident_char(c) || c == ':' || c == '.' || c == '+' || c == '/';
}

double parse_number(std::string_view s, std::size_t line, std::string_view what)
{
    s = trim(s);
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw GrammarError("invalid " + std::string(what) + " '" + std::string(s) + "'", line);
    }
    return v;
}

TerminalBlock parse_block(std::string_view body, std::size_t line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = body.find(',', start);
        fields.push_back(trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    if (fields.size() != 5) {
        throw GrammarError("terminal block needs 5 fields [name,kind,count,lo,hi], got " + std::to_string(fields.size()), line);
    }
    TerminalBlock block;
    if (!is_identifier(fields[0])) {
        throw GrammarError("invalid terminal block name '" + std::string(fields[0]) + "'", line);
    }
    block.name = std::string(fields[0]);
    if (fields[1] == "int") {
        block.kind = BlockKind::integer;
    } else if (fields[1] == "float") {
        block.kind = BlockKind::real;
    } else {
        throw GrammarError("unknown terminal kind '" + std::string(fields[1]) + "'", line);
    }
    const double count = parse_number(fields[2], line, "count");
    if (count < 1 || count != std::floor(count) || count > 1e6) {
        throw GrammarError("terminal block count must be a positive integer", line);
    }
    block.count = static_cast<int>(count);
    block.lo = parse_number(fields[3], line, "lower bound");
    if (fields[4] == "x") {
        block.dynamic_hi = true;
    } else {
        block.hi = parse_number(fields[4], line, "upper bound");
        if (*block.hi < block.lo) {
            throw GrammarError("terminal block '" + block.name + "' has lo > hi", line);
        }
    }
    if (block.kind == BlockKind::integer) {
        if (block.lo != std::floor(block.lo) || (block.hi && *block.hi != std::floor(*block.hi))) {
            throw GrammarError("int block '" + block.name + "' needs integral bounds", line);
        }
    }
    return block;
}

Alternative parse_alternative(std::string_view text, std::size_t line)
{
    Alternative alt;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '<') {
            const auto close = text.find('>', i);
            if (close == std::string_view::npos) {
                throw GrammarError("unterminated nonterminal", line);
            }
            const auto name = trim(text.substr(i + 1, close - i - 1));
            if (!is_identifier(name)) {
                throw GrammarError("invalid nonterminal name '" + std::string(name) + "'", line);
            }
            alt.emplace_back(NonTerminal{std::string(name)});
            i = close + 1;
        } else if (c == '[') {
            const auto close = text.find(']', i);
            if (close == std::string_view::npos) {
                throw GrammarError("unterminated terminal block", line);
            }
            alt.emplace_back(parse_block(text.substr(i + 1, close - i - 1), line));
            i = close + 1;
        } else if (is_literal_char(c)) {
            const auto begin = i;
            while (i < text.size() && is_literal_char(text[i])) {
                ++i;
            }
            alt.emplace_back(Literal{std::string(text.substr(begin, i - begin))});
        } else {
            throw GrammarError(std::string("unexpected character '") + c + "'", line);
        }
    }
    if (alt.empty()) {
        throw GrammarError("empty alternative", line);
    }
    return alt;
}

// Splits on '|' that are not inside a terminal block.
std::vector<std::string_view> split_alternatives(std::string_view rhs)
{
    std::vector<std::string_view> parts;
    int bracket = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        if (rhs[i] == '[') {
            ++bracket;
        } else if (rhs[i] == ']') {
            --bracket;
        } else if (rhs[i] == '|' && bracket == 0) {
            parts.push_back(rhs.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(rhs.substr(start));
    return parts;
}

enum class WalkMode { generate, decode, repair };

class Walker {
public:
    Walker(const Grammar& grammar, int max_depth, WalkMode mode, const GeneList* input, Rng* rng)
        : grammar_(grammar), max_depth_(max_depth), mode_(mode), input_(input), rng_(rng) {}

    void expand(const std::string& nt, int depth)
    {
        if (depth > max_depth_) {
            throw DerivationError("expansion depth exceeded " + std::to_string(max_depth_) + " at <" + nt + ">");
        }
        const Rule& rule = grammar_.rule(nt);
        const int n = static_cast<int>(rule.alternatives.size());
        const int choice = next_expansion(nt, n);
        if (mode_ != WalkMode::decode) {
            output_.expansions[nt].push_back(choice);
        }
        for (const Symbol& sym : rule.alternatives[static_cast<std::size_t>(choice)]) {
            if (const auto* child = std::get_if<NonTerminal>(&sym)) {
                expand(child->name, depth + 1);
            } else if (const auto* lit = std::get_if<Literal>(&sym)) {
                emit_literal(lit->text);
            } else {
                emit_block(std::get<TerminalBlock>(sym));
            }
        }
    }

    GeneList& output() { return output_; }
    DecodeResult& result() { return result_; }

private:
    int next_expansion(const std::string& nt, int n)
    {
        auto& cursor = result_.used_expansions[nt];
        std::optional<int> stored;
        if (input_ != nullptr) {
            if (auto it = input_->expansions.find(nt); it != input_->expansions.end() && cursor < it->second.size()) {
                stored = it->second[cursor];
            }
        }
        ++cursor;
        if (mode_ == WalkMode::decode) {
            if (!stored) {
                throw InvalidGenotype("genes exhausted for <" + nt + ">");
            }
            if (*stored < 0 || *stored >= n) {
                throw InvalidGenotype("expansion index " + std::to_string(*stored) + " out of range for <" + nt + "> with " +
                                      std::to_string(n) + " alternatives");
            }
            return *stored;
        }
        if (stored && *stored >= 0 && *stored < n) {
            return *stored;
        }
        return static_cast<int>(uniform_index(*rng_, static_cast<std::size_t>(n)));
    }

    static bool in_range(const TerminalBlock& block, double v)
    {
        if (!std::isfinite(v) || v < block.lo || v > *block.hi) {
            return false;
        }
        if (block.kind == BlockKind::integer) {
            return v == std::floor(v);
        }
        return v < *block.hi || block.lo == *block.hi;
    }

    void emit_literal(const std::string& text)
    {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            result_.attributes[text];
        } else {
            result_.attributes[text.substr(0, colon)].emplace_back(text.substr(colon + 1));
        }
    }

    void emit_block(const TerminalBlock& block)
    {
        if (!block.hi) {
            throw DerivationError("terminal block '" + block.name + "' has an unbound dynamic upper limit");
        }
        auto& values = result_.attributes[block.name];
        auto& cursor = result_.used_values[block.name];
        for (int k = 0; k < block.count; ++k) {
            std::optional<double> stored;
            if (input_ != nullptr) {
                if (auto it = input_->values.find(block.name); it != input_->values.end() && cursor < it->second.size()) {
                    stored = it->second[cursor];
                }
            }
            ++cursor;
            double v = 0.0;
            if (mode_ == WalkMode::decode) {
                if (!stored) {
                    throw InvalidGenotype("values exhausted for block '" + block.name + "'");
                }
                if (!in_range(block, *stored)) {
                    throw InvalidGenotype("value out of range for block '" + block.name + "'");
                }
                v = *stored;
            } else if (stored && in_range(block, *stored)) {
                v = *stored;
            } else {
                v = sample_block_value(block, *rng_);
            }
            if (mode_ != WalkMode::decode) {
                output_.values[block.name].push_back(v);
            }
            values.emplace_back(v);
        }
    }

    const Grammar& grammar_;
    int max_depth_;
    WalkMode mode_;
    const GeneList* input_;
    Rng* rng_;
    GeneList output_;
    DecodeResult result_;
};

void require_start(const Grammar& grammar, std::string_view start)
{
    if (!grammar.has_rule(start)) {
        throw DerivationError("unknown start symbol <" + std::string(start) + ">");
    }
}

} // namespace

bool Grammar::has_rule(std::string_view name) const
{
    return index_.find(name) != index_.end();
}

const Rule& Grammar::rule(std::string_view name) const
{
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw GrammarError("no rule <" + std::string(name) + ">");
    }
    return rules_[it->second];
}

Grammar parse_grammar(std::string_view text)
{
    if (trim(text).empty()) {
        throw GrammarError("empty grammar text");
    }
    Grammar g;
    std::vector<std::pair<std::string, std::size_t>> references;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto arrow = line.find("::=");
        if (arrow == std::string_view::npos) {
            throw GrammarError("expected '<name> ::= ...'", line_no);
        }
        const auto lhs = trim(line.substr(0, arrow));
        if (lhs.size() < 3 || lhs.front() != '<' || lhs.back() != '>' || !is_identifier(trim(lhs.substr(1, lhs.size() - 2)))) {
            throw GrammarError("invalid rule name '" + std::string(lhs) + "'", line_no);
        }
        Rule rule;
        rule.name = std::string(trim(lhs.substr(1, lhs.size() - 2)));
        if (g.index_.contains(rule.name)) {
            throw GrammarError("duplicate rule <" + rule.name + ">", line_no);
        }
        bool dynamic = false;
        for (auto part : split_alternatives(line.substr(arrow + 3))) {
            Alternative alt = parse_alternative(part, line_no);
            for (const auto& sym : alt) {
                if (const auto* nt = std::get_if<NonTerminal>(&sym)) {
                    references.emplace_back(nt->name, line_no);
                } else if (const auto* b = std::get_if<TerminalBlock>(&sym); b && b->dynamic_hi) {
                    dynamic = true;
                }
            }
            rule.alternatives.push_back(std::move(alt));
        }
        if (dynamic) {
            if (g.dynamic_rule_) {
                throw GrammarError("dynamic bound 'x' appears in both <" + *g.dynamic_rule_ + "> and <" + rule.name + ">",
                                   line_no);
            }
            g.dynamic_rule_ = rule.name;
        }
        g.index_.emplace(rule.name, g.rules_.size());
        g.rules_.push_back(std::move(rule));
    }
    for (const auto& [name, line] : references) {
        if (!g.has_rule(name)) {
            throw GrammarError("undefined nonterminal <" + name + ">", line);
        }
    }
    return g;
}

Grammar load_grammar(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GrammarError("cannot open grammar file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grammar(ss.str());
}

Grammar bind_dynamic_bound(const Grammar& grammar, std::int64_t value)
{
    if (!grammar.dynamic_rule_) {
        return grammar;
    }
    Grammar bound = grammar;
    bound.dynamic_bound_ = value;
    for (auto& alt : bound.rules_[bound.index_.at(*bound.dynamic_rule_)].alternatives) {
        for (auto& sym : alt) {
            if (auto* b = std::get_if<TerminalBlock>(&sym); b && b->dynamic_hi) {
                b->hi = static_cast<double>(value);
            }
        }
    }
    return bound;
}

double sample_block_value(const TerminalBlock& block, Rng& rng)
{
    if (!block.hi) {
        throw DerivationError("terminal block '" + block.name + "' has an unbound dynamic upper limit");
    }
    if (*block.hi < block.lo) {
        throw DerivationError("terminal block '" + block.name + "' bound below its lower limit");
    }
    if (block.kind == BlockKind::integer) {
        return static_cast<double>(
            uniform_int(rng, static_cast<std::int64_t>(block.lo), static_cast<std::int64_t>(*block.hi)));
    }
    if (block.lo == *block.hi) {
        return block.lo;
    }
    return uniform_real(rng, block.lo, *block.hi);
}

GeneList random_derivation(const Grammar& grammar, std::string_view start, Rng& rng, int max_depth)
{
    require_start(grammar, start);
    Walker w(grammar, max_depth, WalkMode::generate, nullptr, &rng);
    w.expand(std::string(start), 1);
    return std::move(w.output());
}

DecodeResult decode(const Grammar& grammar, std::string_view start, const GeneList& genes, int max_depth)
{
    require_start(grammar, start);
    Walker w(grammar, max_depth, WalkMode::decode, &genes, nullptr);
    w.expand(std::string(start), 1);
    return std::move(w.result());
}

GeneList repair(const Grammar& grammar, std::string_view start, const GeneList& genes, Rng& rng, int max_depth)
{
    require_start(grammar, start);
    Walker w(grammar, max_depth, WalkMode::repair, &genes, &rng);
    w.expand(std::string(start), 1);
    return std::move(w.output());
}

const TerminalBlock* find_block(const Grammar& grammar, std::string_view name)
{
    for (const auto& rule : grammar.rules()) {
        for (const auto& alt : rule.alternatives) {
            for (const auto& sym : alt) {
                if (const auto* b = std::get_if<TerminalBlock>(&sym); b && b->name == name) {
                    return b;
                }
            }
        }
    }
    return nullptr;
}

double attribute_number(const AttributeMap& attrs, const std::string& name, std::size_t index)
{
    auto it = attrs.find(name);
    if (it == attrs.end() || index >= it->second.size()) {
        throw InvalidGenotype("missing numeric attribute '" + name + "'");
    }
    if (const auto* v = std::get_if<double>(&it->second[index])) {
        return *v;
    }
    throw InvalidGenotype("attribute '" + name + "' is not numeric");
}

const std::string& attribute_string(const AttributeMap& attrs, const std::string& name, std::size_t index)
{
    auto it = attrs.find(name);
    if (it == attrs.end() || index >= it->second.size()) {
        throw InvalidGenotype("missing attribute '" + name + "'");
    }
    if (const auto* v = std::get_if<std::string>(&it->second[index])) {
        return *v;
    }
    throw InvalidGenotype("attribute '" + name + "' is not a string");
}

std::string_view default_grammar_text() noexcept
{
    return kDefaultGrammar;
}

} // namespace greenevo
