#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "rotent/boundary_example.hpp"
#include "rotent/localized_entropy.hpp"
#include "rotent/perron.hpp"
#include "rotent/potential.hpp"
#include "rotent/rotation_set.hpp"
#include "rotent/sft.hpp"
#include "rotent/thermo.hpp"

namespace rotent {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
const char* library_version();

/// Whole file as a string. Throws InvalidArgument when unreadable.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// SFT files:
//   # comment
//   d = 2
//   theta = 1/2        (optional, default 1/2)
//   A =
//   1 1                (d rows; digits may also be written without spaces)
//   1 0
Sft parse_sft(std::string_view text, const std::string& source = "<input>");
std::string format_sft(const Sft& s);

// Potential files, one line per admissible k-word:
//   k = 2
//   m = 1
//   01: 0.5            (entries decimal or p/q; words dotted when d > 10)
LcPotential parse_potential(std::string_view text, SftPtr sft, const std::string& source = "<input>",
                            const Limits& limits = {});
std::string format_potential(const LcPotential& phi);

/// Rows of whitespace separated decimals; all rows the same length.
Eigen::MatrixXd parse_matrix(std::string_view text, const std::string& source = "<input>");

/// Shortest representation that reads back to the same double.
std::string format_double(double x);

Json to_json(const Eigen::MatrixXd& columns_as_points);
Json to_json(const Eigen::VectorXd& v);
Json to_json(const Interval& i);
Json to_json(const PerronData<double>& pd);
Json to_json(const RotationPolytope& poly);
Json to_json(const LevelRecord& level);
Json to_json(const EntropyEnclosure& enc);
Json to_json(const ExposedRecord& rec);
Json to_json(const LowerCertificate& cert);
Json to_json(const UpperWitness& wit);

/// { schema_version, command, version, config, result }
Json envelope(const std::string& command, Json config, Json result);
std::string dump(const Json& j);

struct SvgOptions {
  int size = 800;
  /// Written as a header comment when set; off by default so output is byte-stable.
  std::optional<std::string> timestamp;
};

/// The bounding box of everything drawn, widened by 5% per side, is mapped
/// onto the square [0, size]^2 with y pointing up. Hull vertices in order.
std::string polygon_svg(const Eigen::Matrix2Xd& hull, const Eigen::Matrix2Xd& points,
                        const std::vector<Eigen::Vector2d>& marks, const SvgOptions& opt = {});

struct SpectrumRow {
  Eigen::VectorXd w;
  double l = 0;
  double u = 0;
  bool ok = false;
};

/// w_1,...,w_m,l,u,ok with a header line.
std::string spectrum_csv(const std::vector<SpectrumRow>& rows);
/// m = 1: l and u against w. m = 2: one cell per grid point shaded by the
/// enclosure midpoint.
std::string spectrum_svg(const std::vector<SpectrumRow>& rows, const SvgOptions& opt = {});

}  // namespace rotent
