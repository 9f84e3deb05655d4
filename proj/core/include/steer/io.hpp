#pragma once

// JSON documents for assemblages and LHS models.
//
// Assemblage document, version "1":
//   {"version": "1", "n_inputs": |X|, "n_outcomes": |A|, "dim_b": d_B,
//    "elements": [x][a] -> matrix as an array of rows, entry = [re, im]}
// Doubles are written in shortest round-trip form, so parse(serialize(a))
// reproduces every bit.

#include <string>
#include <string_view>

#include "steer/assemblage.hpp"
#include "steer/lhs.hpp"

namespace steer {

inline constexpr const char* kDocumentVersion = "1";

std::string assemblage_to_json(const Assemblage& assemblage, int indent = -1);
// Throws FormatError for malformed JSON or a wrong layout, and the usual
// invariant errors when the matrices do not form an assemblage.
Assemblage assemblage_from_json(std::string_view text);

// {"version": "1", "n_inputs", "n_outcomes", "dim_b", "sigma_lambdas": [lambda] -> matrix}
std::string model_to_json(const LhsModel& model, int indent = -1);
LhsModel model_from_json(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace steer
