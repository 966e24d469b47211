#ifndef QCM_IO_HPP
#define QCM_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "qcm/distortion.hpp"
#include "qcm/grid.hpp"
#include "qcm/mask.hpp"
#include "qcm/packing.hpp"

namespace qcm {

// Writes to a temp file in the target directory, then renames over the
// destination. Readers never observe a half-written file.
void atomic_write(const std::filesystem::path& path, const std::string& data);

// {"level": M, "pixels": [[ix, iy], ...]} with pixels in Morton order.
void save_mask_json(const CompactMask& mask, const std::filesystem::path& path);
CompactMask load_mask_json(const std::filesystem::path& path);

// Plain PBM (P1) with side 2^M; row 0 is the top of the square (iy = 2^M - 1).
// The loader also accepts packed P4. Writing is refused above level 10 where
// the text format stops being a sensible exchange format.
void save_mask_pbm(const CompactMask& mask, const std::filesystem::path& path);
CompactMask load_mask_pbm(const std::filesystem::path& path);

// {"t": ..., "m": ..., "norm": ..., "cubes": [[level, ix, iy], ...]}.
void save_family_json(const PackingFamily& fam, const std::filesystem::path& path);
PackingFamily load_family_json(const std::filesystem::path& path);

// JSON sidecar {"n", "L", "origin", "data"} plus a raw little-endian binary
// of (re, im) double pairs in row-major sample order. The data filename is
// stored relative to the sidecar.
void save_field(const GridField& f, const std::filesystem::path& json_path);
GridField load_field(const std::filesystem::path& json_path);

std::string report_to_json(const ExperimentReport& rep);
ExperimentReport report_from_json(const std::string& text);
void save_report_json(const ExperimentReport& rep, const std::filesystem::path& path);
ExperimentReport load_report_json(const std::filesystem::path& path);

// One row per report; columns are the sorted union of prefixed keys so that
// heterogeneous reports can share a table. Verdicts serialize as 0/1.
std::string reports_to_csv(const std::vector<ExperimentReport>& reps);

}  // namespace qcm

#endif
