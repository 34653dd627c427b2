#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace patchy {

enum class errc {
  index_out_of_range,
  attribute_shape_mismatch,
  self_loop,
  duplicate_node,
  too_large,
  shape_mismatch,
  root_missing,
  grid_too_small,
  mixed_sizes,
  empty_collection,
  exhausted,
  missing_file,
  malformed_line,
  inconsistent_indicator,
  too_small,
  bad_params,
  heterogeneous_batches,
  corrupt_header,
  truncated_payload,
  missing_cache,
  degenerate_labels,
  too_few_samples,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::attribute_shape_mismatch: return "AttributeShapeMismatch";
    case errc::self_loop: return "SelfLoop";
    case errc::duplicate_node: return "DuplicateNode";
    case errc::too_large: return "TooLarge";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::root_missing: return "RootMissing";
    case errc::grid_too_small: return "GridTooSmall";
    case errc::mixed_sizes: return "MixedSizes";
    case errc::empty_collection: return "EmptyCollection";
    case errc::exhausted: return "Exhausted";
    case errc::missing_file: return "MissingFile";
    case errc::malformed_line: return "MalformedLine";
    case errc::inconsistent_indicator: return "InconsistentIndicator";
    case errc::too_small: return "TooSmall";
    case errc::bad_params: return "BadParams";
    case errc::heterogeneous_batches: return "HeterogeneousBatches";
    case errc::corrupt_header: return "CorruptHeader";
    case errc::truncated_payload: return "TruncatedPayload";
    case errc::missing_cache: return "MissingCache";
    case errc::degenerate_labels: return "DegenerateLabels";
    case errc::too_few_samples: return "TooFewSamples";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the `errc` codes so
/// callers (the CLI in particular) can map it onto an exit status.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace patchy
