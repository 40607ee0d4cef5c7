#pragma once

// Context-free grammars with terminal blocks, and DSGE-style genotypes over them.
//
// File format, one rule per line:
//
//     <layer>  ::= <dense> | <dropout>
//     <dense>  ::= layer:dense [units,int,1,8,256] <act>
//     <act>    ::= act:relu | act:sigmoid
//     <middle_point> ::= [middle_point,int,1,0,x]
//
// `#` starts a comment. A terminal block is `[name,kind,count,lo,hi]` with kind
// `int` or `float`; `hi` may be the token `x`, a bound supplied later through
// bind_dynamic_bound(). Bare tokens are literals; `key:value` literals decode to
// the attribute `key` holding the string `value`.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "greenevo/rng.hpp"

namespace greenevo {

inline constexpr int kDefaultMaxDepth = 50;

enum class BlockKind { integer, real };

struct TerminalBlock {
    std::string name;
    BlockKind kind = BlockKind::integer;
    int count = 1;
    double lo = 0.0;
    std::optional<double> hi; ///< empty only while a dynamic bound is unbound
    bool dynamic_hi = false;

    bool operator==(const TerminalBlock&) const = default;
};

struct NonTerminal {
    std::string name;
    bool operator==(const NonTerminal&) const = default;
};

struct Literal {
    std::string text;
    bool operator==(const Literal&) const = default;
};

using Symbol = std::variant<NonTerminal, Literal, TerminalBlock>;
using Alternative = std::vector<Symbol>;

struct Rule {
    std::string name;
    std::vector<Alternative> alternatives;
    bool operator==(const Rule&) const = default;
};

class Grammar {
public:
    Grammar() = default;

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    bool has_rule(std::string_view name) const;
    const Rule& rule(std::string_view name) const;

    /// Name of the rule holding the `x` bound, if any.
    const std::optional<std::string>& dynamic_rule() const noexcept { return dynamic_rule_; }
    /// Value currently bound to `x`, if any.
    std::optional<std::int64_t> dynamic_bound() const noexcept { return dynamic_bound_; }

    bool operator==(const Grammar&) const = default;

private:
    friend Grammar parse_grammar(std::string_view text);
    friend Grammar bind_dynamic_bound(const Grammar& grammar, std::int64_t value);

    std::vector<Rule> rules_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::optional<std::string> dynamic_rule_;
    std::optional<std::int64_t> dynamic_bound_;
};

/// Encoded genes: expansion choices per nonterminal and sampled values per
/// terminal block, each consumed in derivation order.
struct GeneList {
    std::map<std::string, std::vector<int>> expansions;
    std::map<std::string, std::vector<double>> values;

    bool operator==(const GeneList&) const = default;
};

using AttributeValue = std::variant<std::string, double>;
using AttributeMap = std::map<std::string, std::vector<AttributeValue>>;

struct DecodeResult {
    AttributeMap attributes;
    std::map<std::string, std::size_t> used_expansions;
    std::map<std::string, std::size_t> used_values;
};

Grammar parse_grammar(std::string_view text);
Grammar load_grammar(const std::string& path);

/// Copy of `grammar` in which every `x` bound reads as `value`.
Grammar bind_dynamic_bound(const Grammar& grammar, std::int64_t value);

GeneList random_derivation(const Grammar& grammar, std::string_view start, Rng& rng,
                           int max_depth = kDefaultMaxDepth);

/// Pure function of (grammar, start, genes). Throws InvalidGenotype on
/// exhausted or out-of-range genes, DerivationError past max_depth.
DecodeResult decode(const Grammar& grammar, std::string_view start, const GeneList& genes,
                    int max_depth = kDefaultMaxDepth);

/// Walk the derivation reusing existing genes where they are valid, drawing
/// fresh ones where they are missing or out of range, and dropping the surplus.
GeneList repair(const Grammar& grammar, std::string_view start, const GeneList& genes, Rng& rng,
                int max_depth = kDefaultMaxDepth);

/// Draw one value for a block. Integers are inclusive of both bounds, reals cover [lo, hi).
double sample_block_value(const TerminalBlock& block, Rng& rng);

/// The terminal block with this name reachable from any rule, if present.
const TerminalBlock* find_block(const Grammar& grammar, std::string_view name);

/// Numeric attribute accessor; throws InvalidGenotype when missing or non-numeric.
double attribute_number(const AttributeMap& attrs, const std::string& name, std::size_t index = 0);
/// String attribute accessor; throws InvalidGenotype when missing or non-string.
const std::string& attribute_string(const AttributeMap& attrs, const std::string& name, std::size_t index = 0);

/// The grammar shipped with the project: dense and dropout layers, gradient
/// descent hyperparameters and the dynamically bounded middle_point rule.
std::string_view default_grammar_text() noexcept;

} // namespace greenevo
