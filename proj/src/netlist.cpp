#include "cph/netlist.hpp"

#include "cph/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cph {

char kind_letter(ElementKind k) {
    switch (k) {
        case ElementKind::V: return 'V';
        case ElementKind::I: return 'I';
        case ElementKind::C: return 'C';
        case ElementKind::L: return 'L';
        case ElementKind::R: return 'R';
        case ElementKind::G: return 'G';
    }
    return '?';
}

const char* kind_variable(ElementKind k) {
    switch (k) {
        case ElementKind::V:
        case ElementKind::I: return "t";
        case ElementKind::C: return "q";
        case ElementKind::L: return "phi";
        case ElementKind::R: return "i";
        case ElementKind::G: return "v";
    }
    return "?";
}

std::size_t CircuitSpec::vertex_count() const {
    std::size_t n = 0;
    for (const auto& e : elements) n = std::max({n, e.from, e.to});
    return n;
}

std::size_t CircuitSpec::find(const std::string& name) const {
    for (std::size_t k = 0; k < elements.size(); ++k)
        if (elements[k].name == name) return k;
    throw Error(ErrorCode::InvalidArgument, "no element named '" + name + "'");
}

void validate(const CircuitSpec& spec) {
    if (spec.elements.empty()) throw Error(ErrorCode::DisconnectedGraph, "circuit has no elements");
    std::set<std::string> names;
    const std::size_t n = spec.vertex_count();
    std::vector<bool> seen(n + 1, false);
    for (const auto& e : spec.elements) {
        if (e.from == 0 || e.to == 0)
            throw Error(ErrorCode::NonContiguousVertices, "vertex ids start at 1 (element " + e.name + ")");
        if (e.from == e.to) throw Error(ErrorCode::SelfLoop, "element " + e.name + " joins vertex " +
                                                              std::to_string(e.from) + " to itself");
        if (!names.insert(e.name).second) throw Error(ErrorCode::DuplicateName, e.name);
        seen[e.from] = seen[e.to] = true;
    }
    for (std::size_t v = 1; v <= n; ++v)
        if (!seen[v])
            throw Error(ErrorCode::NonContiguousVertices, "vertex " + std::to_string(v) + " has no edges");

    std::vector<std::size_t> parent(n + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    std::size_t components = n;
    for (const auto& e : spec.elements) {
        const std::size_t a = root(e.from);
        const std::size_t b = root(e.to);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    if (components != 1)
        throw Error(ErrorCode::DisconnectedGraph, std::to_string(components) + " components");
}

namespace {

struct Field {
    std::string text;
    int col;  // 1-based
};

bool parse_kind(const std::string& s, ElementKind& k) {
    static const std::pair<const char*, ElementKind> kinds[] = {
        {"V", ElementKind::V}, {"I", ElementKind::I}, {"C", ElementKind::C},
        {"L", ElementKind::L}, {"R", ElementKind::R}, {"G", ElementKind::G}};
    for (const auto& [name, kind] : kinds) {
        if (s == name) {
            k = kind;
            return true;
        }
    }
    return false;
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::size_t parse_vertex(const Field& f, int line) {
    if (f.text.empty() || f.text.size() > 9 ||
        f.text.find_first_not_of("0123456789") != std::string::npos)
        throw SyntaxError(line, f.col, "expected a positive vertex id, got '" + f.text + "'");
    const std::size_t v = std::stoul(f.text);
    if (v == 0) throw SyntaxError(line, f.col, "vertex ids start at 1");
    return v;
}

ElementSpec parse_line(const std::string& raw, int line) {
    std::string s = raw.substr(0, raw.find('#'));
    std::vector<Field> fields;
    std::size_t p = 0;
    while (fields.size() < 5) {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
        if (p == s.size()) break;
        const std::size_t start = p;
        while (p < s.size() && !std::isspace(static_cast<unsigned char>(s[p]))) ++p;
        fields.push_back({s.substr(start, p - start), static_cast<int>(start) + 1});
    }
    if (fields[0].text != "edge")
        throw SyntaxError(line, fields[0].col, "expected 'edge', got '" + fields[0].text + "'");
    while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    std::size_t end = s.size();
    while (end > p && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    if (fields.size() < 5 || p == end)
        throw SyntaxError(line, static_cast<int>(end) + 1, "expected: edge <name> <kind> <from> <to> <value>");

    ElementSpec e;
    if (!is_identifier(fields[1].text))
        throw SyntaxError(line, fields[1].col, "invalid element name '" + fields[1].text + "'");
    e.name = fields[1].text;
    if (!parse_kind(fields[2].text, e.kind))
        throw SyntaxError(line, fields[2].col, "unknown element kind '" + fields[2].text + "'");
    e.from = parse_vertex(fields[3], line);
    e.to = parse_vertex(fields[4], line);

    const std::string value = s.substr(p, end - p);
    const int vcol = static_cast<int>(p) + 1;
    if (value.front() == '{') {
        if (value.back() != '}') throw SyntaxError(line, vcol + static_cast<int>(value.size()), "missing '}'");
        e.law = parse_expr(std::string_view(value).substr(1, value.size() - 2), kind_variable(e.kind), line,
                           vcol + 1);
    } else {
        char* stop = nullptr;
        const double x = std::strtod(value.c_str(), &stop);
        if (stop != value.c_str() + value.size() || value.find_first_of("xXnNiI") != std::string::npos)
            throw SyntaxError(line, vcol, "expected a decimal literal or {expression}, got '" + value + "'");
        if (!std::isfinite(x)) throw SyntaxError(line, vcol, "value out of range");
        e.law = x;
    }
    return e;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CircuitSpec parse_netlist(std::string_view text) {
    CircuitSpec spec;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string body = raw.substr(0, raw.find('#'));
        if (body.find_first_not_of(" \t") == std::string::npos) continue;
        spec.elements.push_back(parse_line(raw, line));
    }
    validate(spec);
    return spec;
}

CircuitSpec load_netlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_netlist(ss.str());
}

std::string to_netlist_text(const CircuitSpec& spec) {
    std::string out;
    for (const auto& e : spec.elements) {
        out += "edge " + e.name + " " + kind_letter(e.kind) + " " + std::to_string(e.from) + " " +
               std::to_string(e.to) + " ";
        out += e.is_constant() ? format_double(e.constant()) : "{" + e.expression().str() + "}";
        out += "\n";
    }
    return out;
}

}  // namespace cph
