#include "cph/random_circuit.hpp"

#include "cph/error.hpp"
#include "cph/graph.hpp"

#include <cmath>
#include <random>

namespace cph {

namespace {

constexpr ElementKind kKinds[6] = {ElementKind::V, ElementKind::I, ElementKind::C,
                                   ElementKind::L, ElementKind::R, ElementKind::G};

int kind_index(char c) {
    for (int k = 0; k < 6; ++k)
        if (kind_letter(kKinds[k]) == c) return k;
    return -1;
}

// mt19937_64 output is fully specified by the standard; the mapping to
// doubles below is ours, so files are identical across standard libraries.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 gen_;
};

}  // namespace

KindMix KindMix::parse(const std::string& text) {
    KindMix mix;
    mix.weight.fill(0.0);
    if (text.find(':') == std::string::npos) {
        for (char c : text) {
            if (c == ',' || c == ' ') continue;
            const int k = kind_index(c);
            if (k < 0) throw Error(ErrorCode::InvalidArgument, std::string("unknown kind '") + c + "'");
            mix.weight[static_cast<std::size_t>(k)] += 1.0;
        }
    } else {
        std::size_t p = 0;
        while (p < text.size()) {
            std::size_t q = text.find(',', p);
            if (q == std::string::npos) q = text.size();
            const std::string item = text.substr(p, q - p);
            const std::size_t colon = item.find(':');
            if (colon != 1 || kind_index(item[0]) < 0)
                throw Error(ErrorCode::InvalidArgument, "bad kind weight '" + item + "'");
            std::size_t used = 0;
            double w = 0.0;
            try {
                w = std::stod(item.substr(2), &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != item.size() - 2 || !(w >= 0.0) || !std::isfinite(w))
                throw Error(ErrorCode::InvalidArgument, "bad kind weight '" + item + "'");
            mix.weight[static_cast<std::size_t>(kind_index(item[0]))] = w;
            p = q + 1;
        }
    }
    double total = 0.0;
    for (double w : mix.weight) total += w;
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "kind mix has zero total weight");
    return mix;
}

CircuitSpec random_circuit(const RandomCircuitOptions& opts) {
    if (opts.nodes < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 nodes");
    if (opts.edges + 1 < opts.nodes) throw Error(ErrorCode::InvalidArgument, "need edges >= nodes - 1");
    if (!(opts.value_min > 0.0) || !(opts.value_max >= opts.value_min))
        throw Error(ErrorCode::InvalidArgument, "bad parameter range");
    double total = 0.0;
    for (double w : opts.kinds.weight) total += w;

    Stream rng(opts.seed);
    auto draw_kind = [&] {
        double u = rng.uniform() * total;
        for (std::size_t k = 0; k < 6; ++k) {
            if (u < opts.kinds.weight[k]) return kKinds[k];
            u -= opts.kinds.weight[k];
        }
        for (std::size_t k = 6; k-- > 0;)
            if (opts.kinds.weight[k] > 0.0) return kKinds[k];
        return ElementKind::R;
    };
    const double lo = std::log(opts.value_min);
    const double hi = std::log(opts.value_max);

    for (std::size_t attempt = 0; attempt < opts.max_retries; ++attempt) {
        CircuitSpec spec;
        auto add = [&](std::size_t a, std::size_t b) {
            ElementSpec e;
            e.kind = draw_kind();
            if (rng.uniform() < 0.5) std::swap(a, b);
            e.from = a;
            e.to = b;
            e.law = std::exp(lo + (hi - lo) * rng.uniform());
            spec.elements.push_back(std::move(e));
        };
        for (std::size_t v = 2; v <= opts.nodes; ++v) add(v, 1 + rng.below(v - 1));
        for (std::size_t k = opts.nodes - 1; k < opts.edges; ++k) {
            const std::size_t a = 1 + rng.below(opts.nodes);
            std::size_t b = 1 + rng.below(opts.nodes - 1);
            if (b >= a) ++b;
            add(a, b);
        }
        // Interleave tree and extra edges so file order carries no structure.
        for (std::size_t k = spec.elements.size(); k > 1; --k)
            std::swap(spec.elements[k - 1], spec.elements[rng.below(k)]);
        std::array<int, 6> counter{};
        for (auto& e : spec.elements) {
            const auto ki = static_cast<std::size_t>(kind_index(kind_letter(e.kind)));
            e.name = std::string(1, kind_letter(e.kind)) + std::to_string(++counter[ki]);
        }
        try {
            normal_tree_kruskal(CircuitGraph::from_spec(spec));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::VoltageCycle || e.code() == ErrorCode::CurrentCutset) continue;
            throw;
        }
        validate(spec);
        return spec;
    }
    throw Error(ErrorCode::GenerationFailed,
                "no well-posed circuit after " + std::to_string(opts.max_retries) + " attempts");
}

}  // namespace cph
