#ifndef CPH_SIGMA_HPP
#define CPH_SIGMA_HPP

#include "cph/dae.hpp"
#include "cph/linalg.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace cph {

inline constexpr int kNoEntry = std::numeric_limits<int>::min();

// Square matrix of highest derivative orders; kNoEntry stands for -infinity.
class SignatureMatrix {
public:
    SignatureMatrix() = default;
    explicit SignatureMatrix(std::size_t n) : n_(n), s_(n * n, kNoEntry) {}
    static SignatureMatrix from_rows(const std::vector<std::vector<int>>& rows);

    std::size_t size() const { return n_; }
    int operator()(std::size_t i, std::size_t j) const { return s_[i * n_ + j]; }
    int& operator()(std::size_t i, std::size_t j) { return s_[i * n_ + j]; }
    bool finite(std::size_t i, std::size_t j) const { return (*this)(i, j) != kNoEntry; }
    bool operator==(const SignatureMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<int> s_;
};

SignatureMatrix signature_matrix(const CpHSystem& sys);

struct Transversal {
    std::vector<std::size_t> col_of_row;
    int value = 0;
};

// Maximum-value perfect matching over finite entries. Among optimal
// matchings the one using the most diagonal entries wins, then index order.
Transversal hvt(const SignatureMatrix& sigma);

enum class OffsetFlavor { Canonical, Provisional };

struct Offsets {
    std::vector<int> c, d;
    OffsetFlavor flavor = OffsetFlavor::Canonical;
};

// d_j - c_i >= sigma_ij everywhere, with equality on `t` when given.
bool offsets_valid(const SignatureMatrix& sigma, const Offsets& o, const Transversal* t = nullptr);

// Smallest nonnegative valid offsets by fixed-point iteration.
Offsets canonical_offsets(const SignatureMatrix& sigma, const Transversal& t);

// c = 1 on derivative-free rows (C, l, d, D and relation rows), 0 on the
// c and L rows; d = 1. Throws InvalidOffsets if they fail validation.
Offsets provisional_offsets(const CpHSystem& sys);

// max c_i, plus one if some d_j = 0.
int structural_index(const Offsets& o);

RealMatrix system_jacobian(const CpHSystem& sys, const SignatureMatrix& sigma, const Offsets& o, double t,
                           const Vector& x, const Vector& xd);

inline constexpr double kAmenableTol = 1e-9;

struct SigmaAnalysis {
    SignatureMatrix sigma;
    Transversal transversal;
    Offsets canonical;
    std::optional<Offsets> provisional;
    // The flavor used for J and the verdict: provisional when valid.
    Offsets offsets;
    RealMatrix J;
    double sv_ratio = 0.0;
    bool amenable = false;
    int structural_index = 0;  // of `offsets`
    int canonical_index = 0;
    int dof = 0;
};

// Throws StructurallyIllPosed when no finite transversal exists; a singular
// J is reported through `amenable`.
SigmaAnalysis analyze(const CpHSystem& sys, double t, const Vector& x, const Vector& xd);

}  // namespace cph

#endif
