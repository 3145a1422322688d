#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ipix::harness {

struct ReportResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> warnings;
};

// Fixed, bijective class id -> RGB palette for prediction dumps.
void palette_color(std::size_t class_id, std::uint8_t rgb[3]);

// Emits static artifacts for a completed run directory:
//   loss_curve.svg  — l_sum, l_ipix and alpha against iteration
//   miou_curve.svg  — evaluation mIoU against epoch (skipped with a warning
//                     when the run has no evaluation points)
//   sample_<k>_{image,pred,truth}.ppm — qualitative dumps for a few
//                     unlabeled samples
// An incomplete run produces warnings and whatever can still be emitted.
ReportResult emit_reports(const std::filesystem::path& run_dir,
                          const std::filesystem::path& out_dir);

}  // namespace ipix::harness
