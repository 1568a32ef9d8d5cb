#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfock/decompose.hpp"
#include "dfock/fockops.hpp"
#include "dfock/geometry.hpp"
#include "dfock/seminorms.hpp"

namespace dfock {

using json = nlohmann::json;

/// Numeric CSV with a header row. Values are written with %.17g. When
/// `labels` is non-empty it is written as the first column (header[0]).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Reads a numeric CSV; throws ConfigError with the line number on bad cells.
CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const json& doc);

/// index, re, im, rho
void save_lattice_csv(const std::filesystem::path& path, const Lattice& lattice);
Lattice load_lattice_csv(const std::filesystem::path& path, double r, double rmax);

/// Columns (r, laplacian_phi) give a custom_radial weight, (x, y,
/// laplacian_phi) a custom_planar one on the regular grid the rows span.
WeightSpec load_weight_profile(const std::filesystem::path& path);

/// Columns (x, y, re_f, im_f) on a regular grid, bilinearly interpolated.
Symbol load_sampled_symbol(const std::filesystem::path& path);

json to_json(const DiskFit& fit);
json to_json(const SchattenReport& rep);
json to_json(const SeminormReport& rep);
json to_json(const DecompositionReport& rep, bool with_rows = false);
json to_json(const LatticeCheck& check);
json to_json(const PartitionStats& stats);
json to_json(const DoublingReport& rep);
json to_json(const ToeplitzReport& rep);
json to_json(const WeightSpec& spec);

/// n, s_n
CsvTable svals_table(const std::vector<double>& svals);
/// t, mean, max per quadrature ring.
CsvTable profile_table(const SeminormReport& rep);

/// <prefix>_coeffs.csv (center, degree, natural coefficients) and
/// <prefix>_fields.csv (x, y, f1, f2 on a grid of spacing h over |z| <= rmax).
void dump_decomposition(const std::filesystem::path& prefix, const Decomposition& dec, double rmax, double h);

}  // namespace dfock
