#include "mwlse/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mwlse/model.hpp"

namespace mwlse {

using nlohmann::ordered_json;

std::string format_double(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(v);
        return os.str();
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& field, std::size_t line_no) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size() || !std::isfinite(v)) {
        std::ostringstream os;
        os << "malformed numeric field '" << field << "' (line " << line_no << ")";
        throw std::runtime_error(os.str());
    }
    return v;
}

bool parse_iso_date(const std::string& s, int& y, int& m, int& d) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    y = std::stoi(s.substr(0, 4));
    m = std::stoi(s.substr(5, 2));
    d = std::stoi(s.substr(8, 2));
    return m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

}  // namespace

void write_panel_csv(const std::string& path, const arma::mat& values,
                     const std::vector<std::string>& col_names,
                     const std::vector<std::string>& meta) {
    if (col_names.size() != values.n_cols)
        throw std::invalid_argument("write_panel_csv: header width mismatch");
    std::ostringstream os;
    for (const auto& line : meta) os << "# " << line << "\n";
    for (std::size_t i = 0; i < col_names.size(); ++i)
        os << (i ? "," : "") << col_names[i];
    os << "\n";
    for (arma::uword t = 0; t < values.n_rows; ++t) {
        for (arma::uword j = 0; j < values.n_cols; ++j)
            os << (j ? "," : "") << format_double(values(t, j));
        os << "\n";
    }
    write_text_file(path, os.str());
}

PanelCsv read_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    PanelCsv panel;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string m = line.substr(1);
            if (!m.empty() && m[0] == ' ') m.erase(0, 1);
            panel.meta.push_back(m);
            continue;
        }
        const auto fields = split_csv_line(line);
        if (!have_header) {
            panel.col_names = fields;
            have_header = true;
            continue;
        }
        if (fields.size() != panel.col_names.size()) {
            std::ostringstream os;
            os << "malformed row with " << fields.size() << " fields (line " << line_no << ")";
            throw std::runtime_error(os.str());
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double_field(f, line_no));
        rows.push_back(std::move(row));
    }
    if (!have_header) throw std::runtime_error("missing header row in '" + path + "'");
    panel.values.set_size(rows.size(), panel.col_names.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t j = 0; j < rows[t].size(); ++j)
            panel.values(t, j) = rows[t][j];
    return panel;
}

PricePanel ingest_prices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    PricePanel panel;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "date") {
                std::ostringstream os;
                os << "price header must start with 'date' (line " << line_no << ")";
                throw std::runtime_error(os.str());
            }
            panel.tickers.assign(fields.begin() + 1, fields.end());
            have_header = true;
            continue;
        }
        if (fields.size() != panel.tickers.size() + 1) {
            std::ostringstream os;
            os << "malformed row with " << fields.size() << " fields (line " << line_no << ")";
            throw std::runtime_error(os.str());
        }
        int y, m, d;
        if (!parse_iso_date(fields[0], y, m, d)) {
            std::ostringstream os;
            os << "invalid ISO-8601 date '" << fields[0] << "' (line " << line_no << ")";
            throw std::runtime_error(os.str());
        }
        if (!panel.dates.empty() && fields[0] <= panel.dates.back()) {
            std::ostringstream os;
            os << "dates not strictly increasing at '" << fields[0] << "' (line "
               << line_no << ")";
            throw std::runtime_error(os.str());
        }
        std::vector<double> row;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const double v = parse_double_field(fields[j], line_no);
            if (v <= 0.0) {
                std::ostringstream os;
                os << "non-positive price for " << panel.tickers[j - 1] << " at "
                   << fields[0] << " (line " << line_no << ")";
                throw std::runtime_error(os.str());
            }
            row.push_back(v);
        }
        panel.dates.push_back(fields[0]);
        rows.push_back(std::move(row));
    }
    if (!have_header) throw std::runtime_error("missing header row in '" + path + "'");
    if (rows.size() < 2) throw std::runtime_error("price panel needs at least two rows");
    panel.prices.set_size(rows.size(), panel.tickers.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t j = 0; j < rows[t].size(); ++j)
            panel.prices(t, j) = rows[t][j];
    return panel;
}

arma::mat to_returns(const PricePanel& panel) {
    const arma::mat logp = arma::log(panel.prices);
    return logp.rows(1, logp.n_rows - 1) - logp.rows(0, logp.n_rows - 2);
}

arma::mat binarize_returns(const arma::mat& returns) {
    if (!returns.is_finite())
        throw std::invalid_argument("binarize_returns: non-finite return");
    return arma::conv_to<arma::mat>::from(returns >= 0.0);
}

arma::mat categorical_stack(const arma::mat& categories, int M) {
    if (M < 2) throw std::invalid_argument("categorical_stack: M must be >= 2");
    const arma::uword T = categories.n_rows;
    const arma::uword d = categories.n_cols;
    arma::mat stacked(T, d * static_cast<arma::uword>(M - 1), arma::fill::zeros);
    for (arma::uword t = 0; t < T; ++t) {
        for (arma::uword i = 0; i < d; ++i) {
            const double v = categories(t, i);
            if (v != std::floor(v) || v < 1.0 || v > static_cast<double>(M)) {
                std::ostringstream os;
                os << "category " << v << " outside {1.." << M << "} at row " << t + 1;
                throw std::invalid_argument(os.str());
            }
            const int j = static_cast<int>(v);
            if (j < M) stacked(t, static_cast<arma::uword>(j - 1) * d + i) = 1.0;
        }
    }
    return stacked;
}

std::string family_name(Family family) {
    switch (family) {
        case Family::count: return "count";
        case Family::binary: return "binary";
        default: return "categorical-stacked";
    }
}

Family family_from_name(const std::string& name) {
    if (name == "count") return Family::count;
    if (name == "binary") return Family::binary;
    if (name == "categorical-stacked") return Family::categorical_stacked;
    throw std::invalid_argument("unknown family '" + name + "'");
}

namespace {

ordered_json matrix_to_json(const arma::mat& m) {
    ordered_json rows = ordered_json::array();
    for (arma::uword i = 0; i < m.n_rows; ++i) {
        ordered_json row = ordered_json::array();
        for (arma::uword j = 0; j < m.n_cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

arma::mat matrix_from_json(const ordered_json& j) {
    const auto n_rows = j.size();
    const auto n_cols = n_rows ? j.at(0).size() : 0;
    arma::mat m(n_rows, n_cols);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t k = 0; k < n_cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
    return m;
}

ordered_json vec_to_json(const arma::vec& v) {
    ordered_json arr = ordered_json::array();
    for (arma::uword i = 0; i < v.n_elem; ++i) arr.push_back(v(i));
    return arr;
}

arma::vec vec_from_json(const ordered_json& j) {
    arma::vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
    return v;
}

}  // namespace

ordered_json fit_result_to_json(const FitResult& fit) {
    ordered_json j;
    j["spec"] = {{"family", family_name(fit.spec.family)},
                 {"d", fit.spec.d},
                 {"M", fit.spec.M},
                 {"diagonal_A", fit.spec.diagonal_A}};
    j["estimates"] = {{"c", vec_to_json(fit.theta.c)},
                      {"A", matrix_to_json(fit.theta.A)},
                      {"B", matrix_to_json(fit.theta.B)},
                      {"flat", vec_to_json(fit.theta_flat)}};
    j["param_names"] = param_names(fit.spec);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["score_norm"] = fit.score_norm;
    j["objective"] = fit.objective;
    if (std::isfinite(fit.r_hat)) j["r_hat"] = fit.r_hat;
    if (!fit.std_errors.is_empty()) j["std_errors"] = vec_to_json(fit.std_errors);
    if (!fit.covariance.is_empty()) j["covariance"] = matrix_to_json(fit.covariance);
    ordered_json stages = ordered_json::array();
    for (const auto& st : fit.stage_log) {
        stages.push_back({{"stage", st.stage},
                          {"converged", st.converged},
                          {"iterations", st.iterations},
                          {"reweights", st.reweights},
                          {"objective", st.objective},
                          {"score_norm", st.score_norm}});
    }
    j["stage_log"] = stages;
    if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
    return j;
}

FitResult fit_result_from_json(const ordered_json& j) {
    FitResult fit;
    const auto& spec = j.at("spec");
    fit.spec.family = family_from_name(spec.at("family").get<std::string>());
    fit.spec.d = spec.at("d").get<int>();
    fit.spec.M = spec.at("M").get<int>();
    fit.spec.diagonal_A = spec.at("diagonal_A").get<bool>();
    fit.theta.c = vec_from_json(j.at("estimates").at("c"));
    fit.theta.A = matrix_from_json(j.at("estimates").at("A"));
    fit.theta.B = matrix_from_json(j.at("estimates").at("B"));
    fit.theta_flat = pack_params(fit.theta, fit.spec);
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.score_norm = j.at("score_norm").get<double>();
    fit.objective = j.at("objective").get<double>();
    if (j.contains("r_hat")) fit.r_hat = j.at("r_hat").get<double>();
    if (j.contains("std_errors")) fit.std_errors = vec_from_json(j.at("std_errors"));
    if (j.contains("covariance")) fit.covariance = matrix_from_json(j.at("covariance"));
    if (j.contains("stage_log")) {
        for (const auto& st : j.at("stage_log")) {
            fit.stage_log.push_back({st.at("stage").get<std::string>(),
                                     st.at("converged").get<bool>(),
                                     st.at("iterations").get<int>(),
                                     st.at("reweights").get<int>(),
                                     st.at("objective").get<double>(),
                                     st.at("score_norm").get<double>()});
        }
    }
    if (j.contains("warnings"))
        fit.warnings = j.at("warnings").get<std::vector<std::string>>();
    return fit;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace mwlse
