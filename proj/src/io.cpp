#include "lqdeceive/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lqdeceive::io {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Json number(double value) {
  if (std::isfinite(value)) return value;
  return format_double(value);
}

Matrix matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::InvalidInput, name + " must be a non-empty array of rows");
  }
  // A bare row of numbers is accepted as a 1 x k matrix.
  if (j.front().is_number()) return matrix_from_json(Json::array({j}), name);
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j.front().is_array() || j.front().empty()) {
    throw Error(ErrorKind::InvalidInput, name + " rows must be non-empty arrays");
  }
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      std::ostringstream os;
      os << name << " row " << r << " has a different length than row 0";
      throw Error(ErrorKind::InvalidInput, os.str());
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw Error(ErrorKind::InvalidInput, name + " entries must be numbers");
      }
      M(r, c) = v.get<double>();
    }
  }
  if (!M.allFinite()) throw Error(ErrorKind::InvalidInput, name + " has non-finite entries");
  return M;
}

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(number(M(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::InvalidInput, name + " must be a non-empty array");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::InvalidInput, name + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string trace_csv(const DeceptionResult& result) {
  std::string out = "iter,cost,grad_norm,step_norm\n";
  for (const auto& it : result.trace) {
    out += std::to_string(it.index) + "," + format_double(it.cost) + "," +
           format_double(it.grad_norm) + "," + format_double(it.step_norm) + "\n";
  }
  return out;
}

std::string learner_csv(const LearnerTrace& trace) {
  std::string out = "iteration,distance\n";
  for (std::size_t j = 0; j < trace.iterations.size(); ++j) {
    out += std::to_string(j) + "," + format_double(trace.iterations[j].distance) + "\n";
  }
  return out;
}

std::string suppression_csv(const SuppressionTable& table) {
  std::string out;
  for (Eigen::Index c = 0; c < table.ratio.cols(); ++c) {
    out += ",Col. " + std::to_string(c + 1);
  }
  out += "\n";
  for (Eigen::Index r = 0; r < table.ratio.rows(); ++r) {
    out += "Row " + std::to_string(r + 1);
    for (Eigen::Index c = 0; c < table.ratio.cols(); ++c) {
      out += ",";
      out += table.applicable(r, c) ? format_double(table.ratio(r, c)) : "n/a";
    }
    out += "\n";
  }
  return out;
}

std::string energy_table_csv(const std::vector<std::string>& labels,
                             const std::vector<double>& nominal,
                             const std::vector<double>& deceived) {
  if (nominal.size() != labels.size() || deceived.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "energy columns must match the labels");
  }
  std::string out = "Case";
  for (const auto& l : labels) out += "," + l;
  out += "\nNominal";
  for (double e : nominal) out += "," + format_double(e);
  out += "\nDeceived";
  for (double e : deceived) out += "," + format_double(e);
  out += "\n";
  return out;
}

}  // namespace lqdeceive::io
