#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bootagg/aggregate.hpp"
#include "bootagg/dataset.hpp"
#include "bootagg/raster.hpp"

namespace bootagg {

// Shell command template for an external renderer. Placeholders {resample},
// {full}, {out}, {width}, {height}, {index} are substituted verbatim before
// the command runs under /bin/sh -c.
struct RendererCommand {
  std::string command_template;
  std::string workdir;  // empty = inherit the current directory
  double timeout_seconds = 60.0;

  void validate() const;  // requires {resample} and {out}, timeout > 0
};

// Writes the datasets as CSV temp files, runs the command, decodes the PNG it
// left at {out} and enforces the requested dimensions. The replicate index is
// also exported as BOOTAGG_REPLICATE_INDEX. Temp files live in a fresh
// directory, removed on success and kept (and named in the error) on failure.
RasterImage invoke_renderer(const RendererCommand& cmd, const Dataset& resample,
                            const Dataset& full, std::int64_t index,
                            std::int64_t width, std::int64_t height);

// Runs one renderer subprocess per resample, at most `parallelism` at a time.
// The stack preserves resample order no matter how execution interleaves; the
// first failure (lowest replicate index) aborts the run.
ImageStack render_stack(const RendererCommand& cmd,
                        const std::vector<Dataset>& resamples, const Dataset& full,
                        std::int64_t width, std::int64_t height, int parallelism);

}  // namespace bootagg
