#pragma once

#include <string>
#include <vector>

namespace tabgraph {

// ASCII lowercase; bytes outside A-Z pass through untouched.
std::string casefold(const std::string& s);

// strip leading/trailing whitespace
std::string trim(const std::string& s);

// collapse internal whitespace runs to single spaces, trim ends
std::string collapse_whitespace(const std::string& s);

// trim + casefold; the normalization used when counting distinct cell strings
std::string normalize_cell(const std::string& s);

// Word tokenizer: casefold, split on whitespace and punctuation. Digit runs
// with internal '.'/',' separators stay single tokens ("1,000.50").
std::vector<std::string> tokenize(const std::string& s);

// True if the cell parses as a number after stripping currency symbols,
// '#', '%', commas and whitespace.
bool is_numeric_cell(const std::string& s);

}  // namespace tabgraph
