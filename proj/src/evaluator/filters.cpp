#include "evaluator/filters.hpp"

#include <algorithm>
#include <vector>

#include "common/error.hpp"

namespace poselift::evaluator {

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "mean") return FilterKind::kMean;
  if (name == "median") return FilterKind::kMedian;
  fail(ErrorCode::kInvalidArgument, "unknown filter kind '" + name + "' (expected mean or median)");
}

kernel::Matrix filter_baseline(const kernel::Matrix& frames, FilterKind kind, std::size_t window) {
  require(window % 2 == 1, ErrorCode::kInvalidArgument,
          "filter window must be odd, got " + std::to_string(window));
  require(frames.rows() >= 1, ErrorCode::kInvalidArgument, "filter: empty sequence");
  const std::size_t half = window / 2, L = frames.rows();
  kernel::Matrix out(L, frames.cols());
  std::vector<double> buf;
  for (std::size_t t = 0; t < L; ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(L - 1, t + half);
    for (std::size_t k = 0; k < frames.cols(); ++k) {
      buf.clear();
      for (std::size_t s = lo; s <= hi; ++s) buf.push_back(frames(s, k));
      if (kind == FilterKind::kMean) {
        double sum = 0.0;
        for (double v : buf) sum += v;
        out(t, k) = sum / static_cast<double>(buf.size());
      } else {
        std::sort(buf.begin(), buf.end());
        const std::size_t m = buf.size() / 2;
        out(t, k) = buf.size() % 2 == 1 ? buf[m] : 0.5 * (buf[m - 1] + buf[m]);
      }
    }
  }
  return out;
}

}  // namespace poselift::evaluator
