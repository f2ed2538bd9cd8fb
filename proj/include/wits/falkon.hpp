#pragma once

#include "wits/kernel.hpp"
#include "wits/witness.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace wits {

/// Which centering enters the normal equations. `Unscaled` uses the
/// idempotent N = diag(P_n, P_m); `Pooled` uses N_c via its square root
/// diag(P_n / sqrt(c), P_m / sqrt(1 - c)) so the solution matches the exact
/// solver at the same lambda, up to a factor 1 / (n + m).
enum class FalkonCentering { Unscaled, Pooled };

struct FalkonConfig {
    Index num_centers = 500;
    int cg_iterations = 50;
    double lambda = 1e-2;
    std::uint64_t seed = 0;
    FalkonCentering centering = FalkonCentering::Unscaled;
    double c = 0.5;               // only read for FalkonCentering::Pooled
    Index block_rows = 128;       // rows of K_ZM materialised at a time
    double tolerance = 1e-10;     // relative preconditioned residual for early exit

    void validate(Index pooled_size) const;
};

/// Lower Cholesky factors of the two-stage preconditioner:
///   K_MM + jitter = T T^T,   T^T N_M N_M^T T / M + lambda I = A A^T.
/// The implied operator B = T^{-T} A^{-T} satisfies
///   (B B^T)^{-1} = K_MM N_M N_M^T K_MM / M + lambda K_MM.
struct FalkonPreconditioner {
    Eigen::MatrixXd t_lower;
    Eigen::MatrixXd a_lower;
    double t_jitter = 0.0;
    double a_jitter = 0.0;
};

struct FalkonDiagnostics {
    int iterations = 0;
    std::vector<double> residual_history;  // preconditioned residual norms, index 0 is the start
    Index peak_matrix_elements = 0;        // largest dense matrix allocated by the solve
    Index max_data_block_rows = 0;         // largest number of data rows in one kernel block
    double t_jitter = 0.0;
    double a_jitter = 0.0;
};

struct FalkonResult {
    Sample centers;
    Labels center_labels;
    Vector alpha;
    double mean_difference = 0.0;  // delta^T K_ZM alpha on the training data
    FalkonDiagnostics diagnostics;
};

/// Uniform subsample of M (point, label) pairs without replacement.
std::pair<Sample, Labels> select_centers(const Sample& z, const Labels& labels, Index num_centers,
                                         std::uint64_t seed);

FalkonPreconditioner falkon_preconditioner(const Sample& centers, const Labels& center_labels, const Kernel& k,
                                           double lambda, FalkonCentering centering = FalkonCentering::Unscaled,
                                           double c = 0.5);

/// Nystrom KFDA solve by preconditioned conjugate residual (CG in the operator inner product) on
///   (R_MZ R_MZ^T + (n+m) lambda K_MM) alpha = K_MZ delta,  R_MZ = K_MZ N.
/// K_ZM is streamed in row blocks; no (n+m) x (n+m) matrix is formed.
FalkonResult fda_falkon(const Sample& z, const Labels& labels, const Kernel& k, const FalkonConfig& config);

/// Nystrom KFDA witness on Xtr, Ytr with centers as basis, oriented so the
/// training mean difference is nonnegative.
WitnessModel kfda_witness_nystrom(const Kernel& k, const Sample& xtr, const Sample& ytr, const FalkonConfig& config,
                                  FalkonDiagnostics* diagnostics = nullptr);

}  // namespace wits
