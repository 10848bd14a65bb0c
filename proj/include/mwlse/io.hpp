#ifndef MWLSE_IO_HPP
#define MWLSE_IO_HPP

#include <armadillo>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mwlse/fit.hpp"
#include "mwlse/types.hpp"

namespace mwlse {

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// ---- observation panels ----

struct PanelCsv {
    std::vector<std::string> col_names;
    arma::mat values;
    std::vector<std::string> meta;   // leading '#' lines, markers stripped
};

// Comma-separated, dot decimal, LF endings, mandatory header; metadata
// rides in leading '#' lines.
void write_panel_csv(const std::string& path, const arma::mat& values,
                     const std::vector<std::string>& col_names,
                     const std::vector<std::string>& meta = {});
PanelCsv read_panel_csv(const std::string& path);

// ---- price panels ----

struct PricePanel {
    std::vector<std::string> dates;        // ISO-8601, strictly increasing
    arma::mat prices;                      // T x d, strictly positive
    std::vector<std::string> tickers;
};

// Header row "date,<ticker>..."; malformed rows are reported with their
// line number, non-positive prices with their cell.
PricePanel ingest_prices(const std::string& path);

// Elementwise log price differences; T-1 rows.
arma::mat to_returns(const PricePanel& panel);

// Indicator of a non-negative return (a zero return maps to 1).
arma::mat binarize_returns(const arma::mat& returns);

// One-hot stacking of a categorical panel with values in {1..M} over the
// first M-1 categories, category-major: column (j-1)*d + i indicates
// category j for series i.
arma::mat categorical_stack(const arma::mat& categories, int M);

// ---- JSON ----

nlohmann::ordered_json fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const nlohmann::ordered_json& j);

std::string family_name(Family family);
Family family_from_name(const std::string& name);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mwlse

#endif
