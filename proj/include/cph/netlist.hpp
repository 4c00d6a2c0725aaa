#ifndef CPH_NETLIST_HPP
#define CPH_NETLIST_HPP

#include "cph/expr.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cph {

enum class ElementKind { V, I, C, L, R, G };

char kind_letter(ElementKind k);
// Free variable of an expression law for this kind: t, q, phi, i or v.
const char* kind_variable(ElementKind k);

// A constant means a constant source (V, I) or a linear law:
// v = q/C, i = phi/L, v = R*i, i = G*v.
using Law = std::variant<double, Expr>;

struct ElementSpec {
    std::string name;
    ElementKind kind = ElementKind::R;
    std::size_t from = 0;  // 1-based vertex ids
    std::size_t to = 0;
    Law law = 0.0;

    bool is_constant() const { return std::holds_alternative<double>(law); }
    double constant() const { return std::get<double>(law); }
    const Expr& expression() const { return std::get<Expr>(law); }
};

struct CircuitSpec {
    std::vector<ElementSpec> elements;  // file order = edge numbering

    std::size_t vertex_count() const;
    std::size_t find(const std::string& name) const;  // throws InvalidArgument
};

// Checks the CircuitSpec invariants: >= 1 element, no self loops, unique
// names, vertices exactly {1..n}, connected.
void validate(const CircuitSpec& spec);

CircuitSpec parse_netlist(std::string_view text);
CircuitSpec load_netlist(const std::string& path);
std::string to_netlist_text(const CircuitSpec& spec);

}  // namespace cph

#endif
