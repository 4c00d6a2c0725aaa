#include "cph/error.hpp"
#include "cph/random_circuit.hpp"
#include "cph/sigma.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace cph;
using cph::test::Rng;

namespace {

constexpr int X = kNoEntry;

struct Built {
    std::shared_ptr<const CircuitModel> model;
    CpHSystem sys;
};

std::vector<std::size_t> edges_named(const CircuitGraph& g, std::initializer_list<const char*> names) {
    std::vector<std::size_t> out;
    for (const char* n : names) out.push_back(g.find(n));
    std::sort(out.begin(), out.end());
    return out;
}

Built running(ModelKind kind) {
    auto m = std::make_shared<const CircuitModel>(parse_netlist(cph::test::kRunningExample));
    const NormalTree t = validate_tree(m->graph(), edges_named(m->graph(), {"V", "C1", "R", "L1"}));
    return {m, kind == ModelKind::Model2 ? build_model2(m, t) : build_model1(m, t)};
}

Built kruskal(const CircuitSpec& spec, ModelKind kind = ModelKind::Model2) {
    auto m = std::make_shared<const CircuitModel>(spec);
    const NormalTree t = normal_tree_kruskal(m->graph());
    return {m, kind == ModelKind::Model2 ? build_model2(m, t) : build_model1(m, t)};
}

SigmaAnalysis analyze_at_random(const CpHSystem& sys, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(sys.size());
    return analyze(sys, 0.0, rng.matrix(n, 1, -0.1, 0.1), rng.matrix(n, 1, -0.1, 0.1));
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return ErrorCode::InvalidArgument;
}

int brute_force_value(const SignatureMatrix& s, bool& exists) {
    std::vector<std::size_t> perm(s.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    int best = std::numeric_limits<int>::min();
    exists = false;
    do {
        int v = 0;
        bool ok = true;
        for (std::size_t i = 0; i < s.size() && ok; ++i) {
            ok = s.finite(i, perm[i]);
            if (ok) v += s(i, perm[i]);
        }
        if (ok) {
            exists = true;
            best = std::max(best, v);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Elementwise-smallest valid offsets by exhaustive search over small values.
Offsets brute_force_offsets(const SignatureMatrix& s, const Transversal& t, int max_value) {
    const std::size_t n = s.size();
    Offsets best;
    best.c.assign(n, max_value + 1);
    best.d.assign(n, max_value + 1);
    std::vector<int> c(n, 0);
    for (;;) {
        Offsets o;
        o.c = c;
        o.d.assign(n, 0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                if (s.finite(i, j)) o.d[j] = std::max(o.d[j], s(i, j) + c[i]);
        if (offsets_valid(s, o, &t)) {
            for (std::size_t k = 0; k < n; ++k) {
                best.c[k] = std::min(best.c[k], o.c[k]);
                best.d[k] = std::min(best.d[k], o.d[k]);
            }
        }
        std::size_t k = 0;
        while (k < n && ++c[k] > max_value) c[k++] = 0;
        if (k == n) break;
    }
    return best;
}

}  // namespace

TEST(SignatureMatrix, RunningExampleModel2) {
    const Built b = running(ModelKind::Model2);
    // columns q_C2, q_C1, phi_L1, phi_L2, i_R, v_G; rows f_C2, f_C1, f_L1,
    // f_L2, f_R (KCL at the R twig), f_G (KVL around the G link)
    const SignatureMatrix expect = SignatureMatrix::from_rows({{0, 0, X, X, X, X},
                                                              {1, 1, X, 0, X, X},
                                                              {X, X, 0, 0, X, X},
                                                              {X, 0, 1, 1, 0, X},
                                                              {X, X, X, 0, 0, 0},
                                                              {X, X, X, X, 0, 0}});
    EXPECT_EQ(signature_matrix(b.sys), expect);
}

TEST(SignatureMatrix, SmallCircuits) {
    const Built rc = kruskal(parse_netlist(cph::test::kRcLoop));
    // (q' - i, i + q) over (q, i)
    EXPECT_EQ(signature_matrix(rc.sys), SignatureMatrix::from_rows({{1, 0}, {0, 0}}));
    const Built lc = kruskal(parse_netlist(cph::test::kLcLoop));
    EXPECT_EQ(lc.sys.layout().count(VarRole::xhat), 0u);
    EXPECT_EQ(signature_matrix(lc.sys).size(), 2u);
}

TEST(Hvt, Examples) {
    const Built b = running(ModelKind::Model2);
    const Transversal t = hvt(signature_matrix(b.sys));
    EXPECT_EQ(t.value, 2);

    const SignatureMatrix diag = SignatureMatrix::from_rows({{0, X, X}, {X, 1, X}, {X, X, 0}});
    EXPECT_EQ(hvt(diag).col_of_row, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(hvt(diag).value, 1);
    // ties broken toward the diagonal
    EXPECT_EQ(hvt(SignatureMatrix::from_rows({{0, 0}, {0, 0}})).col_of_row, (std::vector<std::size_t>{0, 1}));

    EXPECT_EQ(code_of([] { hvt(SignatureMatrix::from_rows({{0, 1}, {X, X}})); }), ErrorCode::StructurallyIllPosed);
    EXPECT_EQ(code_of([] { hvt(SignatureMatrix::from_rows({{0, X}, {1, X}})); }), ErrorCode::StructurallyIllPosed);
}

TEST(Hvt, MatchesBruteForceOnSmallMatrices) {
    Rng rng(71);
    int feasible = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 1 + rng.index(6);
        SignatureMatrix s(n);
        const double density = rng.uniform(0.2, 0.9);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (rng.uniform() < density) s(i, j) = static_cast<int>(rng.index(2));
        bool exists = false;
        const int best = brute_force_value(s, exists);
        if (!exists) {
            EXPECT_EQ(code_of([&] { hvt(s); }), ErrorCode::StructurallyIllPosed);
            continue;
        }
        ++feasible;
        const Transversal t = hvt(s);
        EXPECT_EQ(t.value, best);
        std::vector<std::size_t> cols = t.col_of_row;
        std::sort(cols.begin(), cols.end());
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(cols[j], j);
        const Offsets o = canonical_offsets(s, t);
        EXPECT_TRUE(offsets_valid(s, o, &t));
        EXPECT_EQ(std::accumulate(o.d.begin(), o.d.end(), 0) - std::accumulate(o.c.begin(), o.c.end(), 0), best);
        if (n <= 4) {
            const Offsets small = brute_force_offsets(s, t, 3);
            EXPECT_EQ(o.c, small.c);
            EXPECT_EQ(o.d, small.d);
        }
    }
    EXPECT_GT(feasible, 1000);
}

TEST(Offsets, CanonicalExamples) {
    const Built b = running(ModelKind::Model2);
    const SignatureMatrix s = signature_matrix(b.sys);
    const Offsets o = canonical_offsets(s, hvt(s));
    EXPECT_EQ(o.d, (std::vector<int>{1, 1, 1, 1, 0, 0}));
    EXPECT_EQ(o.c, (std::vector<int>{1, 0, 1, 0, 0, 0}));
    EXPECT_EQ(structural_index(o), 2);

    const SignatureMatrix zero = SignatureMatrix::from_rows({{0, 0}, {0, 0}});
    const Offsets z = canonical_offsets(zero, hvt(zero));
    EXPECT_EQ(z.c, (std::vector<int>{0, 0}));
    EXPECT_EQ(z.d, (std::vector<int>{0, 0}));

    // x1 + x2 = 0, x1 - x2' = 0
    const SignatureMatrix two = SignatureMatrix::from_rows({{0, 0}, {0, 1}});
    const Offsets t = canonical_offsets(two, hvt(two));
    EXPECT_EQ(t.c, (std::vector<int>{0, 0}));
    EXPECT_EQ(t.d, (std::vector<int>{0, 1}));
}

TEST(Offsets, ProvisionalExamples) {
    EXPECT_EQ(provisional_offsets(running(ModelKind::Model2).sys).c, (std::vector<int>{1, 0, 1, 0, 1, 1}));
    EXPECT_EQ(provisional_offsets(running(ModelKind::Model2).sys).d, std::vector<int>(6, 1));
    EXPECT_EQ(provisional_offsets(running(ModelKind::Model1).sys).c, (std::vector<int>{1, 0, 1, 0, 1, 1, 1, 1}));
    EXPECT_EQ(provisional_offsets(kruskal(parse_netlist(cph::test::kLcLoop)).sys).c, (std::vector<int>{0, 0}));

    auto m = std::make_shared<const CircuitModel>(parse_netlist(cph::test::kRunningExample));
    const NormalTree t = spanning_tree(m->graph(), edges_named(m->graph(), {"V", "R", "L1", "L2"}));
    const CpHSystem bad = build_model2(m, t, BuildOptions{false});
    EXPECT_EQ(code_of([&] { provisional_offsets(bad); }), ErrorCode::InvalidOffsets);
}

TEST(SystemJacobian, Examples) {
    Rng rng(72);
    const Built b = running(ModelKind::Model2);
    const SigmaAnalysis a = analyze_at_random(b.sys, rng);
    // block lower triangular: (q | phi | xhat) against (C,c | l,L | d,D)
    EXPECT_TRUE(a.J.block(0, 2, 2, 4).isZero());
    EXPECT_TRUE(a.J.block(2, 4, 2, 2).isZero());
    EXPECT_GT(std::abs(a.J.block(0, 0, 2, 2).determinant()), 0);
    EXPECT_GT(std::abs(a.J.block(2, 2, 2, 2).determinant()), 0);
    EXPECT_GT(std::abs(a.J.block(4, 4, 2, 2).determinant()), 0);

    const Built rc = kruskal(parse_netlist(cph::test::kRcLoop));
    const SignatureMatrix s = signature_matrix(rc.sys);
    const Offsets canon = canonical_offsets(s, hvt(s));
    const RealMatrix J = system_jacobian(rc.sys, s, canon, 0.0, Vector::Zero(2), Vector::Zero(2));
    // d = (1, 0), c = (0, 0): the KVL row sees q only through an inactive
    // entry, so J = [[1, -1], [0, 1]].
    RealMatrix expect(2, 2);
    expect << 1, -1, 0, 1;
    EXPECT_EQ(J, expect);

    auto m = std::make_shared<const CircuitModel>(parse_netlist(cph::test::kRunningExample));
    const NormalTree t = spanning_tree(m->graph(), edges_named(m->graph(), {"V", "R", "L1", "L2"}));
    const SigmaAnalysis bad = analyze_at_random(build_model2(m, t, BuildOptions{false}), rng);
    EXPECT_EQ(bad.offsets.flavor, OffsetFlavor::Canonical);
    EXPECT_FALSE(bad.amenable);
    EXPECT_LT(bad.sv_ratio, 1e-9);
}

TEST(Analyze, IndexBranches) {
    Rng rng(73);
    const SigmaAnalysis run = analyze_at_random(running(ModelKind::Model2).sys, rng);
    EXPECT_TRUE(run.amenable);
    EXPECT_EQ(run.dof, 2);
    EXPECT_EQ(run.structural_index, 1);
    EXPECT_EQ(run.canonical_index, 2);

    const SigmaAnalysis run1 = analyze_at_random(running(ModelKind::Model1).sys, rng);
    EXPECT_TRUE(run1.amenable);
    EXPECT_EQ(run1.dof, 2);
    EXPECT_EQ(run1.structural_index, 1);

    const SigmaAnalysis lc = analyze_at_random(kruskal(parse_netlist(cph::test::kLcLoop)).sys, rng);
    EXPECT_TRUE(lc.amenable);
    EXPECT_EQ(lc.dof, 2);
    EXPECT_EQ(lc.structural_index, 0);

    const SigmaAnalysis vr = analyze_at_random(kruskal(parse_netlist(cph::test::kVrLoop)).sys, rng);
    EXPECT_TRUE(vr.amenable);
    EXPECT_EQ(vr.dof, 0);
    EXPECT_EQ(vr.structural_index, 1);
}

TEST(Analyze, RandomPassiveCircuitsAreAmenable) {
    Rng rng(74);
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        RandomCircuitOptions o;
        o.seed = seed;
        o.nodes = 2 + seed % 11;
        o.edges = std::min<std::size_t>(20, o.nodes - 1 + seed % 10);
        const CircuitSpec spec = random_circuit(o);
        for (ModelKind kind : {ModelKind::Model2, ModelKind::Model1}) {
            const Built b = kruskal(spec, kind);
            const CpHSystem& sys = b.sys;
            const SigmaAnalysis a = analyze_at_random(sys, rng);
            ASSERT_TRUE(a.provisional.has_value());
            EXPECT_TRUE(a.amenable) << to_netlist_text(spec);
            EXPECT_TRUE(offsets_valid(a.sigma, *a.provisional, &a.transversal));
            EXPECT_TRUE(offsets_valid(a.sigma, a.canonical, &a.transversal));
            auto val = [](const Offsets& off) {
                return std::accumulate(off.d.begin(), off.d.end(), 0) - std::accumulate(off.c.begin(), off.c.end(), 0);
            };
            EXPECT_EQ(val(*a.provisional), a.transversal.value);
            EXPECT_EQ(val(a.canonical), a.transversal.value);
            EXPECT_EQ(a.dof, static_cast<int>(sys.split().c.size() + sys.split().L.size()));
            const bool ode = sys.split().C.empty() && sys.split().l.empty() && sys.split().d.empty() &&
                             sys.split().D.empty();
            EXPECT_EQ(a.structural_index, ode ? 0 : 1);
            // the three diagonal blocks are individually nonsingular
            const auto nq = static_cast<Eigen::Index>(sys.split().C.size() + sys.split().c.size());
            const auto np = static_cast<Eigen::Index>(sys.split().l.size() + sys.split().L.size());
            const auto nx = static_cast<Eigen::Index>(sys.size()) - nq - np;
            EXPECT_GT(singular_value_ratio(a.J.block(0, 0, nq, nq)), 1e-12);
            EXPECT_GT(singular_value_ratio(a.J.block(nq, nq, np, np)), 1e-12);
            EXPECT_GT(singular_value_ratio(a.J.block(nq + np, nq + np, nx, nx)), 1e-12);
        }
    }
}
