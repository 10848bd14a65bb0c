#ifndef MWLSE_TYPES_HPP
#define MWLSE_TYPES_HPP

#include <armadillo>
#include <string>
#include <vector>

namespace mwlse {

enum class Family { count, binary, categorical_stacked };

// Model specification for the linear conditional-mean recursion
//   mean_t = c + A * mean_{t-1} + B * Y_{t-1}
// shared by the count (INGARCH) and binary/categorical (BAR) families.
struct ModelSpec {
    Family family = Family::count;
    int d = 1;            // number of observed series
    int M = 2;            // number of categories (categorical_stacked only)
    bool diagonal_A = false;

    // Number of categories actually carried as indicator rows.
    int blocks() const { return family == Family::categorical_stacked ? M - 1 : 1; }
    // Dimension of the stacked observation/mean vectors.
    int effective_dim() const { return d * blocks(); }
    // Length of the packed parameter vector.
    int param_count() const {
        const int per_block_a = diagonal_A ? d : d * d;
        return effective_dim() + blocks() * (per_block_a + d * d);
    }
};

// Parameters of the mean recursion. For categorical_stacked specs A and B
// are block-diagonal with one d x d block per category; entries outside the
// blocks are structurally zero and are not packed.
struct Theta {
    arma::vec c;   // effective_dim
    arma::mat A;   // effective_dim x effective_dim
    arma::mat B;   // effective_dim x effective_dim
};

struct ConstraintViolation {
    std::string what;
    double slack = 0.0;   // negative means violated
};

struct ConstraintReport {
    bool ok = true;
    double worst_slack = arma::datum::inf;
    std::vector<ConstraintViolation> violations;   // only the failed ones
};

// Conventional clamp bounds for binary/categorical means before any division.
inline constexpr double kMeanClampLo = 1e-6;
inline constexpr double kMeanClampHi = 1.0 - 1e-6;

// Slack tolerance applied to every strict inequality in constraint checks.
inline constexpr double kConstraintTol = 1e-10;

}  // namespace mwlse

#endif
