// Command line front end: simulate / fit / montecarlo / stocks / residuals.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mwlse/dgp.hpp"
#include "mwlse/evaluation.hpp"
#include "mwlse/fit.hpp"
#include "mwlse/inference.hpp"
#include "mwlse/io.hpp"
#include "mwlse/model.hpp"
#include "mwlse/parallel.hpp"
#include "mwlse/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mwlse;

namespace {

// outputs created by the current invocation, removed if it fails
std::vector<std::string> g_written;

void track(const std::string& path) { g_written.push_back(path); }

void remove_partial_outputs() {
    for (const auto& p : g_written) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file; flags override it");
    cmd->add_option("--out-dir", args.out_dir, "directory for output artifacts");
    cmd->add_option("--seed", args.seed, "master seed");
}

// overlay config-file values onto options the user did not pass on the CLI
void apply_config(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    const auto j = ordered_json::parse(read_text_file(config_path));
    if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) throw std::runtime_error("unknown config key '" + key + "'");
        if (opt->count() > 0) continue;   // explicit flag wins
        std::string text;
        if (value.is_string()) text = value.get<std::string>();
        else text = value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    fs::create_directories(args.out_dir);
    return (fs::path(args.out_dir) / name).string();
}

ordered_json meta_block(const std::string& command, const CommonArgs& args,
                        const ordered_json& config_echo) {
    ordered_json meta;
    meta["artifact_version"] = kVersion;
    meta["command"] = command;
    meta["seed"] = args.seed;
    if (!args.config_path.empty()) meta["config_file"] = args.config_path;
    meta["config"] = config_echo;
    return meta;
}

std::vector<std::string> meta_lines(const ordered_json& meta) {
    return {"meta: " + meta.dump()};
}

Theta benchmark_theta0(int d) {
    // diagonal feedback 0.3, observation diagonal 0.2 and off-diagonal 0.1,
    // rescaled so ||A + B||_inf = 0.6
    const double scale = 0.6 / (0.5 + 0.1 * (d - 1));
    Theta theta;
    theta.c = arma::vec(d, arma::fill::value(0.5));
    theta.A = scale * 0.3 * arma::eye(d, d);
    theta.B = scale * (0.1 * arma::ones(d, d) + 0.1 * arma::eye(d, d));
    return theta;
}

Theta default_binary_theta(int d) {
    Theta theta;
    theta.c = arma::vec(d, arma::fill::value(0.25));
    theta.A = 0.2 * arma::eye(d, d);
    theta.B = 0.05 * arma::ones(d, d) + 0.1 * arma::eye(d, d);
    return theta;
}

Theta parse_theta_json(const std::string& path) {
    const auto j = ordered_json::parse(read_text_file(path));
    auto parse_mat = [](const ordered_json& v) {
        if (v.empty()) throw std::runtime_error("empty matrix in theta file");
        if (v.at(0).is_number()) {
            arma::vec diag(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) diag(i) = v.at(i).get<double>();
            return arma::mat(arma::diagmat(diag));
        }
        arma::mat m(v.size(), v.at(0).size());
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t k = 0; k < v.at(i).size(); ++k)
                m(i, k) = v.at(i).at(k).get<double>();
        return m;
    };
    Theta theta;
    const auto& c = j.at("c");
    theta.c.set_size(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) theta.c(i) = c.at(i).get<double>();
    theta.A = parse_mat(j.at("A"));
    theta.B = parse_mat(j.at("B"));
    return theta;
}

WeightPlan plan_from_name(const std::string& name, Family family) {
    WeightPlan plan;
    plan.variance_fn =
        family == Family::count ? VarianceFn::identity_mean : VarianceFn::bernoulli;
    if (name == "mwlse-eqc-max") {
        plan.correlation = WorkingCorrelation::eqc;
        plan.r_estimator = REstimator::max_pairwise;
    } else if (name == "mwlse-eqc-mean") {
        plan.correlation = WorkingCorrelation::eqc;
        plan.r_estimator = REstimator::mean_pairwise;
    } else if (name == "lse" || name == "qmle") {
        plan.correlation = WorkingCorrelation::identity;
    } else {
        throw std::runtime_error("unknown plan '" + name + "'");
    }
    return plan;
}

// fit + sandwich + markers for one estimator
ordered_json fit_with_inference(const ModelSpec& spec, const arma::mat& Y,
                                const std::string& plan_name, FitResult& fit_out) {
    FitResult fit;
    arma::cube W;
    if (plan_name == "lse") {
        fit = fit_first_step(spec, Y);
        W = identity_weights(spec.effective_dim(), Y.n_rows);
    } else if (plan_name == "qmle") {
        fit = fit_qmle(spec, Y);
        WeightPlan qplan = plan_from_name("qmle", spec.family);
        W = final_stage_weights(spec, fit, qplan, Y);
    } else {
        const WeightPlan plan = plan_from_name(plan_name, spec.family);
        fit = fit_two_stage(spec, Y, plan);
        W = final_stage_weights(spec, fit, plan, Y);
    }
    const SandwichParts parts = sandwich_covariance(spec, fit.theta, Y, W);
    fit.covariance = parts.G;
    fit.std_errors = standard_errors(parts, Y.n_rows);

    ordered_json j = fit_result_to_json(fit);
    const auto sig = significance_flags(fit.theta_flat, fit.std_errors);
    const auto names = param_names(spec);
    ordered_json marks = ordered_json::array();
    for (std::size_t h = 0; h < sig.size(); ++h) {
        marks.push_back({{"param", names[h]},
                         {"estimate", fit.theta_flat(h)},
                         {"std_error", fit.std_errors(h)},
                         {"z", sig[h].z},
                         {"p_value", sig[h].p_value},
                         {"marker", sig[h].marker}});
    }
    j["significance"] = marks;
    if (parts.ridged) j["warnings"].push_back("near-singular bread matrix, ridged");
    fit_out = fit;
    return j;
}

arma::mat family_variances(const ModelSpec& spec, const arma::mat& fitted) {
    WeightPlan plan;
    plan.variance_fn =
        spec.family == Family::count ? VarianceFn::identity_mean : VarianceFn::bernoulli;
    return pseudo_variances(spec, fitted, plan);
}

void write_acf_csv(const std::string& path, const arma::mat& residuals,
                   const std::vector<std::string>& names, int max_lag,
                   const std::vector<std::string>& meta) {
    arma::mat table(max_lag, residuals.n_cols + 2);
    double band = 0.0;
    for (arma::uword j = 0; j < residuals.n_cols; ++j) {
        const AcfResult r = acf(residuals.col(j), max_lag);
        table.col(j + 1) = r.values;
        band = r.band;
    }
    for (int k = 0; k < max_lag; ++k) table(k, 0) = k + 1;
    table.col(residuals.n_cols + 1).fill(band);
    std::vector<std::string> cols = {"lag"};
    for (const auto& n : names) cols.push_back("acf_" + n);
    cols.push_back("band");
    write_panel_csv(path, table, cols, meta);
    track(path);
}

// ---- subcommands ----

struct SimulateArgs {
    CommonArgs common;
    std::string model = "count";
    int d = 2;
    int T = 200;
    double rho = 0.5;
    int burn_in = 500;
    long max_events = 1000000;
    std::string theta_json;
    std::string out_name = "simulated_panel.csv";
};

int run_simulate(const SimulateArgs& a) {
    const Family family = family_from_name(a.model);
    ModelSpec spec{family, a.d, 2, false};
    Theta theta;
    if (!a.theta_json.empty()) theta = parse_theta_json(a.theta_json);
    else if (family == Family::count) theta = benchmark_theta0(a.d);
    else theta = default_binary_theta(a.d);
    if (theta.c.n_elem != static_cast<arma::uword>(a.d))
        throw std::runtime_error("theta dimension does not match --d");

    SimConfig cfg;
    cfg.T = a.T;
    cfg.burn_in = a.burn_in;
    cfg.seed = a.common.seed;
    cfg.max_events = a.max_events;
    const CopulaSpec copula{a.rho};
    const arma::mat Y = family == Family::count ? simulate_counts(spec, theta, copula, cfg)
                                                : simulate_binary(spec, theta, copula, cfg);

    ordered_json echo;
    echo["model"] = a.model;
    echo["d"] = a.d;
    echo["T"] = a.T;
    echo["rho"] = a.rho;
    echo["burn_in"] = a.burn_in;
    echo["max_events"] = a.max_events;
    echo["theta"] = {{"c", std::vector<double>(theta.c.begin(), theta.c.end())}};

    std::vector<std::string> cols;
    for (int i = 1; i <= a.d; ++i) cols.push_back("Y" + std::to_string(i));
    const std::string path = out_path(a.common, a.out_name);
    write_panel_csv(path, Y, cols, meta_lines(meta_block("simulate", a.common, echo)));
    track(path);
    std::cout << "wrote " << path << " (" << Y.n_rows << " rows)\n";
    return 0;
}

struct FitArgs {
    CommonArgs common;
    std::string model = "count";
    std::string data;
    std::string plan = "mwlse-eqc-max";
    bool diagonal_a = false;
    std::string out_prefix = "fit";
};

int run_fit(const FitArgs& a) {
    const PanelCsv panel = read_panel_csv(a.data);
    const Family family = family_from_name(a.model);
    ModelSpec spec{family, static_cast<int>(panel.values.n_cols), 2, a.diagonal_a};
    validate_series(spec, panel.values);

    FitResult fit;
    ordered_json jfit = fit_with_inference(spec, panel.values, a.plan, fit);

    ordered_json echo;
    echo["model"] = a.model;
    echo["data"] = a.data;
    echo["plan"] = a.plan;
    echo["diagonal_a"] = a.diagonal_a;
    const ordered_json meta = meta_block("fit", a.common, echo);

    ordered_json out;
    out["meta"] = meta;
    out["fit"] = jfit;
    const std::string jpath = out_path(a.common, a.out_prefix + ".json");
    write_text_file(jpath, out.dump(2) + "\n");
    track(jpath);

    const std::string mpath = out_path(a.common, a.out_prefix + "_means.csv");
    std::vector<std::string> cols;
    for (const auto& n : panel.col_names) cols.push_back("mean_" + n);
    write_panel_csv(mpath, fit.fitted_means, cols, meta_lines(meta));
    track(mpath);

    std::cout << "wrote " << jpath << " and " << mpath
              << (fit.converged ? "" : " (fit did not converge)") << "\n";
    return fit.converged ? 0 : 2;
}

struct MonteCarloArgs {
    CommonArgs common;
    int d = 2;
    int T = 100;
    int S = 100;
    std::string rho_grid = "0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    std::string plan = "mwlse-eqc-max";
    int threads = 0;
    int burn_in = 500;
    std::string theta_json;
    bool diagonal_a = false;
    std::string out_prefix = "montecarlo";
};

int run_montecarlo(const MonteCarloArgs& a) {
    std::vector<McGridPoint> grid;
    std::stringstream ss(a.rho_grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) grid.push_back({std::stod(tok), a.d, a.T});
    }
    if (grid.empty()) throw std::runtime_error("empty rho grid");

    McOptions opts;
    opts.S = a.S;
    opts.burn_in = a.burn_in;
    opts.master_seed = a.common.seed;
    opts.threads = a.threads > 0 ? a.threads : hardware_threads();
    opts.diagonal_a = a.diagonal_a;
    opts.plan = plan_from_name(a.plan, Family::count);
    opts.theta0.emplace(a.d, a.theta_json.empty() ? benchmark_theta0(a.d)
                                                  : parse_theta_json(a.theta_json));
    const McReport report = monte_carlo(grid, opts);

    ordered_json echo;
    echo["d"] = a.d;
    echo["T"] = a.T;
    echo["S"] = a.S;
    echo["rho_grid"] = a.rho_grid;
    echo["plan"] = a.plan;
    echo["burn_in"] = a.burn_in;
    echo["diagonal_a"] = a.diagonal_a;
    const ordered_json meta = meta_block("montecarlo", a.common, echo);

    ModelSpec spec{Family::count, a.d, 2, a.diagonal_a};
    const auto names = param_names(spec);
    const arma::uword m = report.rows.front().e_per_param.n_elem;
    arma::mat table(report.rows.size(), 6 + m);
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
        const McRow& row = report.rows[r];
        table(r, 0) = row.point.rho;
        table(r, 1) = row.point.d;
        table(r, 2) = row.point.T;
        table(r, 3) = row.S;
        table(r, 4) = row.dropped;
        table(r, 5) = row.e_overall;
        for (arma::uword h = 0; h < m; ++h) table(r, 6 + h) = row.e_per_param(h);
    }
    std::vector<std::string> cols = {"rho", "d", "T", "S", "dropped", "e_overall"};
    for (const auto& n : names) cols.push_back("e_" + n);
    const std::string cpath = out_path(a.common, a.out_prefix + ".csv");
    write_panel_csv(cpath, table, cols, meta_lines(meta));
    track(cpath);

    ordered_json jrep;
    jrep["meta"] = meta;
    jrep["theta0"] = std::vector<double>(report.theta0_flat.at(a.d).begin(),
                                         report.theta0_flat.at(a.d).end());
    ordered_json rows = ordered_json::array();
    for (const McRow& row : report.rows) {
        rows.push_back(
            {{"rho", row.point.rho},
             {"d", row.point.d},
             {"T", row.point.T},
             {"S", row.S},
             {"dropped", row.dropped},
             {"e_overall", row.e_overall},
             {"e_per_param",
              std::vector<double>(row.e_per_param.begin(), row.e_per_param.end())}});
    }
    jrep["rows"] = rows;
    const std::string jpath = out_path(a.common, a.out_prefix + ".json");
    write_text_file(jpath, jrep.dump(2) + "\n");
    track(jpath);

    for (const McRow& row : report.rows)
        std::cout << "rho=" << row.point.rho << " e=" << row.e_overall
                  << " dropped=" << row.dropped << " (" << row.wall_seconds << "s)\n";
    std::cout << "wrote " << cpath << " and " << jpath << "\n";
    return 0;
}

struct StocksArgs {
    CommonArgs common;
    std::string prices = "data/stocks_quarterly.csv";
    std::string residual_mode = "conventional";
    int max_lag = 20;
    bool full_a = false;
};

int run_stocks(const StocksArgs& a) {
    const PricePanel panel = ingest_prices(a.prices);
    const arma::mat returns = to_returns(panel);
    const arma::mat Y = binarize_returns(returns);
    ModelSpec spec{Family::binary, static_cast<int>(Y.n_cols), 2, !a.full_a};

    ordered_json echo;
    echo["prices"] = a.prices;
    echo["residual_mode"] = a.residual_mode;
    echo["max_lag"] = a.max_lag;
    echo["diagonal_a"] = !a.full_a;
    const ordered_json meta = meta_block("stocks", a.common, echo);

    FitResult lse, qmle, mwlse;
    ordered_json out;
    out["meta"] = meta;
    out["tickers"] = panel.tickers;
    out["n_observations"] = Y.n_rows;
    out["fits"]["lse"] = fit_with_inference(spec, Y, "lse", lse);
    out["fits"]["qmle"] = fit_with_inference(spec, Y, "qmle", qmle);
    out["fits"]["mwlse"] = fit_with_inference(spec, Y, "mwlse-eqc-mean", mwlse);
    const std::string jpath = out_path(a.common, "stocks_fits.json");
    write_text_file(jpath, out.dump(2) + "\n");
    track(jpath);

    // mean absolute errors, one row per estimator
    arma::mat mae_table(3, Y.n_cols + 1);
    const std::vector<const FitResult*> fits = {&qmle, &lse, &mwlse};
    for (std::size_t r = 0; r < fits.size(); ++r) {
        const MaeResult m = mae(Y, fits[r]->fitted_means);
        for (arma::uword j = 0; j < Y.n_cols; ++j) mae_table(r, j) = m.per_series(j);
        mae_table(r, Y.n_cols) = m.overall;
    }
    std::vector<std::string> mae_cols;
    for (const auto& t : panel.tickers) mae_cols.push_back(t);
    mae_cols.push_back("Overall");
    // model name column carried in the meta since panels are numeric
    std::vector<std::string> mae_meta = meta_lines(meta);
    mae_meta.push_back("rows: QMLE,LSE,MWLSE");
    const std::string mae_path = out_path(a.common, "stocks_mae.csv");
    write_panel_csv(mae_path, mae_table, mae_cols, mae_meta);
    track(mae_path);

    // diagnostics on the two-stage fit
    const ResidualMode mode = a.residual_mode == "literal" ? ResidualMode::literal
                                                           : ResidualMode::conventional;
    const arma::mat nu = family_variances(spec, mwlse.fitted_means);
    const arma::mat res = pearson_residuals(Y, mwlse.fitted_means, nu, mode);
    std::vector<std::string> res_cols;
    for (const auto& t : panel.tickers) res_cols.push_back("resid_" + t);
    std::vector<std::string> res_meta = meta_lines(meta);
    res_meta.push_back("residual_mode: " + a.residual_mode);
    const std::string rpath = out_path(a.common, "stocks_residuals.csv");
    write_panel_csv(rpath, res, res_cols, res_meta);
    track(rpath);
    write_acf_csv(out_path(a.common, "stocks_residual_acf.csv"), res, panel.tickers,
                  a.max_lag, res_meta);

    // fitted probabilities from all three estimators
    arma::mat fitted(Y.n_rows, 3 * Y.n_cols);
    std::vector<std::string> fit_cols;
    const std::vector<std::string> est_names = {"qmle", "lse", "mwlse"};
    for (std::size_t e = 0; e < fits.size(); ++e) {
        for (arma::uword j = 0; j < Y.n_cols; ++j) {
            fitted.col(e * Y.n_cols + j) = fits[e]->fitted_means.col(j);
            fit_cols.push_back(est_names[e] + "_" + panel.tickers[j]);
        }
    }
    const std::string fpath = out_path(a.common, "stocks_fitted.csv");
    write_panel_csv(fpath, fitted, fit_cols, meta_lines(meta));
    track(fpath);

    std::cout << "r_hat(mean) = " << mwlse.r_hat << "\n";
    std::cout << "overall MAE: qmle=" << mae_table(0, Y.n_cols)
              << " lse=" << mae_table(1, Y.n_cols)
              << " mwlse=" << mae_table(2, Y.n_cols) << "\n";
    std::cout << "wrote " << jpath << ", " << mae_path << ", " << rpath << ", ...\n";
    return 0;
}

struct ResidualArgs {
    CommonArgs common;
    std::string fit_path;
    std::string data;
    std::string residual_mode = "conventional";
    int max_lag = 20;
};

int run_residuals(const ResidualArgs& a) {
    const auto doc = ordered_json::parse(read_text_file(a.fit_path));
    const FitResult fit = fit_result_from_json(doc.contains("fit") ? doc.at("fit") : doc);
    const PanelCsv panel = read_panel_csv(a.data);
    validate_series(fit.spec, panel.values);
    const arma::mat fitted =
        mean_recursion(fit.spec, fit.theta, panel.values, sample_mean_init(panel.values));
    const arma::mat nu = family_variances(fit.spec, fitted);
    const ResidualMode mode = a.residual_mode == "literal" ? ResidualMode::literal
                                                           : ResidualMode::conventional;
    const arma::mat res = pearson_residuals(panel.values, fitted, nu, mode);

    ordered_json echo;
    echo["fit"] = a.fit_path;
    echo["data"] = a.data;
    echo["residual_mode"] = a.residual_mode;
    echo["max_lag"] = a.max_lag;
    const ordered_json meta = meta_block("residuals", a.common, echo);

    std::vector<std::string> cols;
    for (const auto& n : panel.col_names) cols.push_back("resid_" + n);
    const std::string rpath = out_path(a.common, "residuals.csv");
    write_panel_csv(rpath, res, cols, meta_lines(meta));
    track(rpath);
    write_acf_csv(out_path(a.common, "residual_acf.csv"), res, panel.col_names,
                  a.max_lag, meta_lines(meta));
    std::cout << "wrote " << rpath << " and residual_acf.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage weighted least squares estimation for multivariate "
                 "discrete-valued time series"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "simulate a count or binary panel");
    add_common(c_sim, sim.common);
    c_sim->add_option("--model", sim.model, "count|binary")
        ->check(CLI::IsMember({"count", "binary"}));
    c_sim->add_option("--d", sim.d, "series dimension")->check(CLI::PositiveNumber);
    c_sim->add_option("--T", sim.T, "sample length")->check(CLI::PositiveNumber);
    c_sim->add_option("--rho", sim.rho, "copula correlation in [0,1)");
    c_sim->add_option("--burn-in", sim.burn_in, "discarded initial steps");
    c_sim->add_option("--max-events", sim.max_events, "per-cell event cap");
    c_sim->add_option("--theta-json", sim.theta_json, "JSON file with c, A, B");
    c_sim->add_option("--out", sim.out_name, "output CSV name");

    FitArgs fita;
    CLI::App* c_fit = app.add_subcommand("fit", "fit one estimator to a panel CSV");
    add_common(c_fit, fita.common);
    c_fit->add_option("--model", fita.model, "count|binary")
        ->check(CLI::IsMember({"count", "binary"}));
    c_fit->add_option("--data", fita.data, "panel CSV")->required();
    c_fit->add_option("--plan", fita.plan, "lse|qmle|mwlse-eqc-max|mwlse-eqc-mean")
        ->check(CLI::IsMember({"lse", "qmle", "mwlse-eqc-max", "mwlse-eqc-mean"}));
    c_fit->add_flag("--diagonal-a", fita.diagonal_a, "restrict A to a diagonal");
    c_fit->add_option("--out-prefix", fita.out_prefix, "output name prefix");

    MonteCarloArgs mc;
    CLI::App* c_mc = app.add_subcommand(
        "montecarlo", "relative-efficiency study of QMLE versus two-stage WLS");
    add_common(c_mc, mc.common);
    c_mc->add_option("--d", mc.d, "series dimension")->check(CLI::PositiveNumber);
    c_mc->add_option("--T", mc.T, "sample length")->check(CLI::PositiveNumber);
    c_mc->add_option("--S", mc.S, "replications per grid point")
        ->check(CLI::PositiveNumber);
    c_mc->add_option("--rho-grid", mc.rho_grid, "comma-separated copula correlations");
    c_mc->add_option("--plan", mc.plan, "mwlse-eqc-max|mwlse-eqc-mean")
        ->check(CLI::IsMember({"mwlse-eqc-max", "mwlse-eqc-mean"}));
    c_mc->add_option("--threads", mc.threads, "worker threads (0 = all)");
    c_mc->add_option("--burn-in", mc.burn_in, "simulation burn-in");
    c_mc->add_option("--theta-json", mc.theta_json, "override generating parameters");
    c_mc->add_flag("--diagonal-a", mc.diagonal_a, "fit a diagonal feedback matrix");
    c_mc->add_option("--out-prefix", mc.out_prefix, "output name prefix");

    StocksArgs st;
    CLI::App* c_st = app.add_subcommand(
        "stocks", "price panel to return signs to LSE/QMLE/MWLSE comparison");
    add_common(c_st, st.common);
    c_st->add_option("--prices", st.prices, "quarterly price CSV");
    c_st->add_option("--residual-mode", st.residual_mode, "conventional|literal")
        ->check(CLI::IsMember({"conventional", "literal"}));
    c_st->add_option("--max-lag", st.max_lag, "ACF lags")->check(CLI::PositiveNumber);
    c_st->add_flag("--full-a", st.full_a, "estimate a full feedback matrix");

    ResidualArgs rs;
    CLI::App* c_rs = app.add_subcommand("residuals", "diagnostics for an existing fit");
    add_common(c_rs, rs.common);
    c_rs->add_option("--fit", rs.fit_path, "fit JSON")->required();
    c_rs->add_option("--data", rs.data, "panel CSV")->required();
    c_rs->add_option("--residual-mode", rs.residual_mode, "conventional|literal")
        ->check(CLI::IsMember({"conventional", "literal"}));
    c_rs->add_option("--max-lag", rs.max_lag, "ACF lags")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed()) {
            apply_config(c_sim, sim.common.config_path);
            return run_simulate(sim);
        }
        if (c_fit->parsed()) {
            apply_config(c_fit, fita.common.config_path);
            return run_fit(fita);
        }
        if (c_mc->parsed()) {
            apply_config(c_mc, mc.common.config_path);
            return run_montecarlo(mc);
        }
        if (c_st->parsed()) {
            apply_config(c_st, st.common.config_path);
            return run_stocks(st);
        }
        if (c_rs->parsed()) {
            apply_config(c_rs, rs.common.config_path);
            return run_residuals(rs);
        }
    } catch (const std::exception& e) {
        remove_partial_outputs();
        std::cerr << ordered_json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
