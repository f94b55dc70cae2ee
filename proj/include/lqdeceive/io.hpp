#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lqdeceive/adversary.hpp"
#include "lqdeceive/deception.hpp"
#include "lqdeceive/robustness.hpp"

namespace lqdeceive::io {

using Json = nlohmann::json;

/// Shortest decimal string that parses back to the same double; "inf",
/// "-inf" and "nan" for non-finite values.
std::string format_double(double value);

/// Numbers as JSON numbers, non-finite values as the string markers above.
Json number(double value);

/// Arrays of arrays, row-major. Throws InvalidInput on ragged rows,
/// non-numeric entries or empty input.
Matrix matrix_from_json(const Json& j, const std::string& name);
Json matrix_to_json(const Matrix& M);

Vector vector_from_json(const Json& j, const std::string& name);
Json vector_to_json(const Vector& v);

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with sorted keys and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// iter,cost,grad_norm,step_norm
std::string trace_csv(const DeceptionResult& result);

/// iteration,distance
std::string learner_csv(const LearnerTrace& trace);

/// Row/column labelled ratio table; non-applicable entries print "n/a".
std::string suppression_csv(const SuppressionTable& table);

/// Two-row table with a "Nominal" and a "Deceived" row, one column per
/// labelled case; unstable entries print "inf".
std::string energy_table_csv(const std::vector<std::string>& labels,
                             const std::vector<double>& nominal,
                             const std::vector<double>& deceived);

}  // namespace lqdeceive::io
