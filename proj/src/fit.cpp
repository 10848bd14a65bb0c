#include "mwlse/fit.hpp"

#include <cmath>
#include <sstream>

#include "mwlse/model.hpp"
#include "mwlse/objective.hpp"

namespace mwlse {

namespace {

constexpr double kPenaltyWeight = 1e4;
constexpr double kPenaltyMargin = 1.0 - 1e-6;
constexpr double kFixedPointTol = 1e-9;
constexpr int kMaxReweights = 50;

bool needs_stability_penalty(const ModelSpec& spec) {
    return spec.family != Family::count;
}

// ||sum_j (C_j + A_j + B_j)||_inf together with its argmax row inside a block.
double stability_norm(const ModelSpec& spec, const Theta& theta, int* argmax_row) {
    const int d = spec.d;
    const int q = spec.blocks();
    arma::mat total(d, d, arma::fill::zeros);
    for (int j = 0; j < q; ++j) {
        const arma::span sp(static_cast<arma::uword>(j * d),
                            static_cast<arma::uword>((j + 1) * d - 1));
        arma::mat blk = theta.A(sp, sp) + theta.B(sp, sp);
        blk.diag() += theta.c.subvec(sp);
        total += arma::abs(blk);
    }
    const arma::vec row_sums = arma::sum(total, 1);
    double best = -1.0;
    int row = 0;
    for (int i = 0; i < d; ++i) {
        if (row_sums(i) > best) {
            best = row_sums(i);
            row = i;
        }
    }
    if (argmax_row) *argmax_row = row;
    return best;
}

// Exterior penalty keeping the binary/categorical recursion inside (0,1).
double stability_penalty(const ModelSpec& spec, const arma::vec& flat, arma::vec& grad_add) {
    const Theta theta = unpack_params(flat, spec);
    int row = 0;
    const double norm = stability_norm(spec, theta, &row);
    const double viol = norm - kPenaltyMargin;
    if (viol <= 0.0) return 0.0;
    const auto& layout = pack_layout(spec);
    const double scale = 2.0 * kPenaltyWeight * viol;
    for (std::size_t h = 0; h < layout.size(); ++h) {
        const PackEntry& e = layout[h];
        if (e.row % spec.d != row) continue;
        const double v = flat(h);
        if (e.kind == 'c') grad_add(h) += scale;            // c is positive
        else if (v > 0.0) grad_add(h) += scale;
        else if (v < 0.0) grad_add(h) -= scale;
    }
    return kPenaltyWeight * viol * viol;
}

ObjectiveGradFn penalized(const ModelSpec& spec, ObjectiveGradFn raw) {
    if (!needs_stability_penalty(spec)) return raw;
    return [spec, raw = std::move(raw)](const arma::vec& x, arma::vec& grad) {
        double f = raw(x, grad);
        f += stability_penalty(spec, x, grad);
        return f;
    };
}

struct ScoreInfo {
    double score_norm;
    double raw_objective;
};

// Projected score norm at theta plus the unpenalized objective value.
// score_factor maps objective gradient to score (-1/2 for WLS, -1 for QMLE).
ScoreInfo score_at(const ObjectiveGradFn& raw, const arma::vec& flat,
                   const arma::vec& lower, double score_factor) {
    arma::vec grad(flat.n_elem);
    const double f = raw(flat, grad);
    const arma::vec pg = projected_gradient(grad, flat, lower);
    return {std::abs(score_factor) * arma::norm(pg, 2), f};
}

FitResult finish_fit(const ModelSpec& spec, const arma::mat& Y, const OptimResult& opt,
                     const ObjectiveGradFn& raw, double score_factor,
                     const std::string& stage) {
    const arma::vec lower = parameter_lower_bounds(spec);
    FitResult fit;
    fit.spec = spec;
    fit.theta_flat = opt.x;
    fit.theta = unpack_params(opt.x, spec);
    fit.iterations = opt.iterations;
    const ScoreInfo si = score_at(raw, opt.x, lower, score_factor);
    fit.score_norm = si.score_norm;
    fit.objective = si.raw_objective;
    fit.fitted_means = mean_recursion(spec, fit.theta, Y, sample_mean_init(Y));
    const bool feasible = check_constraints(spec, fit.theta).ok;
    fit.converged = opt.converged && feasible && fit.score_norm <= 1e-6;
    fit.stage_log.push_back(
        {stage, fit.converged, opt.iterations, 0, si.raw_objective, si.score_norm});
    if (!feasible) fit.warnings.push_back("estimate violates parameter constraints");
    return fit;
}

}  // namespace

arma::vec parameter_lower_bounds(const ModelSpec& spec) {
    const auto& layout = pack_layout(spec);
    arma::vec lower(layout.size());
    for (std::size_t h = 0; h < layout.size(); ++h)
        lower(h) = layout[h].kind == 'c' ? 1e-8 : 0.0;
    return lower;
}

Theta default_theta_init(const ModelSpec& spec, const arma::mat& Y) {
    const auto de = static_cast<arma::uword>(spec.effective_dim());
    Theta theta;
    theta.c = 0.5 * sample_mean_init(Y);
    theta.c = arma::clamp(theta.c, 1e-4, arma::datum::inf);
    theta.A = 0.1 * arma::eye(de, de);
    theta.B = 0.1 * arma::eye(de, de);
    return theta;
}

FitResult fit_first_step(const ModelSpec& spec, const arma::mat& Y, const arma::cube& W) {
    validate_series(spec, Y);
    const arma::cube weights =
        W.is_empty() ? identity_weights(spec.effective_dim(), Y.n_rows) : W;
    ObjectiveGradFn raw = [&](const arma::vec& x, arma::vec& grad) {
        return wls_objective_grad(spec, unpack_params(x, spec), Y, weights, {}, grad);
    };
    OptimOptions opts;
    opts.hessian = [&](const arma::vec& x) {
        return wls_expected_hessian(spec, unpack_params(x, spec), Y, weights);
    };
    const arma::vec x0 = pack_params(default_theta_init(spec, Y), spec);
    const OptimResult opt =
        optimize(penalized(spec, raw), parameter_lower_bounds(spec), x0, opts);
    return finish_fit(spec, Y, opt, raw, -0.5, "first-step");
}

FitResult fit_qmle(const ModelSpec& spec, const arma::mat& Y) {
    validate_series(spec, Y);
    ObjectiveGradFn raw = [&](const arma::vec& x, arma::vec& grad) {
        return qmle_neg_loglik_grad(spec, unpack_params(x, spec), Y, {}, grad);
    };
    OptimOptions opts;
    opts.hessian = [&](const arma::vec& x) {
        return qmle_expected_hessian(spec, unpack_params(x, spec), Y);
    };
    const arma::vec x0 = pack_params(default_theta_init(spec, Y), spec);
    const OptimResult opt =
        optimize(penalized(spec, raw), parameter_lower_bounds(spec), x0, opts);
    FitResult fit = finish_fit(spec, Y, opt, raw, -1.0, "qmle");

    if (spec.family != Family::count) {
        const arma::uword clamped =
            arma::accu(fit.fitted_means <= kMeanClampLo) +
            arma::accu(fit.fitted_means >= kMeanClampHi);
        if (clamped > fit.fitted_means.n_elem / 100) {
            std::ostringstream os;
            os << "fitted probabilities clamped in " << clamped << " cells";
            fit.warnings.push_back(os.str());
        }
    }
    return fit;
}

FitResult fit_two_stage(const ModelSpec& spec, const arma::mat& Y,
                        const WeightPlan& plan, const arma::cube& prior_W) {
    validate_series(spec, Y);
    FitResult stage1 = fit_first_step(spec, Y, prior_W);

    // fix the working correlation from the first step
    arma::mat p_inv;
    double r_hat = arma::datum::nan;
    if (plan.correlation == WorkingCorrelation::eqc) {
        const arma::mat Rhat = pearson_residual_correlations(Y, stage1.fitted_means);
        r_hat = estimate_r(plan, Rhat);
        p_inv = eqc_inverse(r_hat, spec.effective_dim());
    } else {
        p_inv = arma::eye(spec.effective_dim(), spec.effective_dim());
    }

    const arma::vec lower = parameter_lower_bounds(spec);
    arma::vec flat = stage1.theta_flat;
    arma::cube W;
    OptimResult opt;
    ObjectiveGradFn raw;
    int total_iter = 0;
    int passes = 0;
    bool fixed_point = false;
    for (int k = 0; k < kMaxReweights; ++k) {
        ++passes;
        const Theta theta = unpack_params(flat, spec);
        const arma::mat fitted = mean_recursion(spec, theta, Y, sample_mean_init(Y));
        W = weights_from_parts(pseudo_variances(spec, fitted, plan), p_inv);
        raw = [&spec, &Y, W](const arma::vec& x, arma::vec& grad) {
            return wls_objective_grad(spec, unpack_params(x, spec), Y, W, {}, grad);
        };
        OptimOptions opts;
        opts.hessian = [&spec, &Y, W](const arma::vec& x) {
            return wls_expected_hessian(spec, unpack_params(x, spec), Y, W);
        };
        opt = optimize(penalized(spec, raw), lower, flat, opts);
        total_iter += opt.iterations;
        const double step = arma::norm(opt.x - flat, "inf");
        flat = opt.x;
        if (step <= kFixedPointTol) {
            fixed_point = true;
            break;
        }
    }

    FitResult fit = finish_fit(spec, Y, opt, raw, -0.5, "second-stage");
    fit.iterations = total_iter + stage1.iterations;
    fit.r_hat = r_hat;
    fit.converged = fit.converged && fixed_point;
    fit.stage_log.back().reweights = passes;
    fit.stage_log.insert(fit.stage_log.begin(), stage1.stage_log.begin(),
                         stage1.stage_log.end());
    if (!fixed_point) fit.warnings.push_back("weight reweighting did not reach a fixed point");
    if (!stage1.converged) fit.warnings.push_back("first step did not converge");
    return fit;
}

arma::cube final_stage_weights(const ModelSpec& spec, const FitResult& fit,
                               const WeightPlan& plan, const arma::mat& Y) {
    arma::mat p_inv;
    if (plan.correlation == WorkingCorrelation::eqc) {
        if (!std::isfinite(fit.r_hat))
            throw std::invalid_argument("final_stage_weights: fit carries no r_hat");
        p_inv = eqc_inverse(fit.r_hat, spec.effective_dim());
    } else {
        p_inv = arma::eye(spec.effective_dim(), spec.effective_dim());
    }
    (void)Y;
    return weights_from_parts(pseudo_variances(spec, fit.fitted_means, plan), p_inv);
}

}  // namespace mwlse
