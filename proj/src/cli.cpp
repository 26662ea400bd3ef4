#include "bootagg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bootagg/aggregate.hpp"
#include "bootagg/coverage.hpp"
#include "bootagg/dataset.hpp"
#include "bootagg/errors.hpp"
#include "bootagg/harness.hpp"
#include "bootagg/png_io.hpp"
#include "bootagg/raster.hpp"
#include "bootagg/render.hpp"
#include "bootagg/renderer_protocol.hpp"
#include "bootagg/rng.hpp"
#include "bootagg/special_functions.hpp"

namespace fs = std::filesystem;

namespace bootagg {

namespace {

// Default seed for every subcommand; echoed so runs are reproducible.
constexpr std::uint64_t kDefaultSeed = 1729;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_f4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Exact 4-decimal rounding of num/den (half-up) without going through binary
// floating point, so e.g. 3999/4000 prints 0.9998 rather than 0.9997.
std::string format_fraction_4dp(std::int64_t num, std::int64_t den) {
  std::int64_t scaled = (num * 20000 + den) / (2 * den);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%04lld", static_cast<long long>(scaled / 10000),
                static_cast<long long>(scaled % 10000));
  return buf;
}

void echo(const std::string& key, const std::string& value) {
  std::cout << key << "=" << value << "\n";
}

struct SizeWH {
  std::int64_t w = 900;
  std::int64_t h = 450;
};

SizeWH parse_size(const std::string& text) {
  size_t x = text.find_first_of("xX");
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw DomainError("size must look like 900x450, got \"" + text + "\"");
  SizeWH s;
  try {
    s.w = std::stoll(text.substr(0, x));
    s.h = std::stoll(text.substr(x + 1));
  } catch (const std::exception&) {
    throw DomainError("size must look like 900x450, got \"" + text + "\"");
  }
  if (s.w <= 0 || s.h <= 0) throw DomainError("size dimensions must be positive");
  return s;
}

std::pair<double, double> parse_range(const std::string& text, const char* flag) {
  size_t c = text.find(':');
  if (c == std::string::npos)
    throw DomainError(std::string(flag) + " must look like LO:HI, got \"" + text + "\"");
  try {
    double lo = std::stod(text.substr(0, c));
    double hi = std::stod(text.substr(c + 1));
    if (!(lo < hi)) throw DomainError(std::string(flag) + " needs LO < HI");
    return {lo, hi};
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception&) {
    throw DomainError(std::string(flag) + " must look like LO:HI, got \"" + text + "\"");
  }
}

Rgb parse_color(const std::string& text, const char* flag) {
  int ch[3];
  char extra;
  if (std::sscanf(text.c_str(), "%d,%d,%d%c", &ch[0], &ch[1], &ch[2], &extra) != 3)
    throw DomainError(std::string(flag) + " must look like R,G,B, got \"" + text + "\"");
  for (int v : ch)
    if (v < 0 || v > 255)
      throw DomainError(std::string(flag) + " channels must be in [0,255]");
  return {static_cast<std::uint8_t>(ch[0]), static_cast<std::uint8_t>(ch[1]),
          static_cast<std::uint8_t>(ch[2])};
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const std::string& tok : split_commas(text)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw DomainError(std::string(what) + ": cannot parse \"" + tok + "\"");
    }
  }
  return out;
}

// normal:MU,SIGMA | uniform:A,B | exponential:RATE | discrete:v1@p1,v2@p2,...
ScalarDistribution parse_distribution(const std::string& text) {
  size_t c = text.find(':');
  std::string name = text.substr(0, c == std::string::npos ? text.size() : c);
  std::string args = c == std::string::npos ? "" : text.substr(c + 1);
  if (name == "normal") {
    std::vector<double> p = parse_doubles(args.empty() ? "0,1" : args, "--dist");
    if (p.size() != 2) throw DomainError("--dist normal needs MU,SIGMA");
    return ScalarDistribution::normal(p[0], p[1]);
  }
  if (name == "uniform") {
    std::vector<double> p = parse_doubles(args.empty() ? "0,1" : args, "--dist");
    if (p.size() != 2) throw DomainError("--dist uniform needs A,B");
    return ScalarDistribution::uniform(p[0], p[1]);
  }
  if (name == "exponential") {
    std::vector<double> p = parse_doubles(args.empty() ? "1" : args, "--dist");
    if (p.size() != 1) throw DomainError("--dist exponential needs RATE");
    return ScalarDistribution::exponential(p[0]);
  }
  if (name == "discrete") {
    std::vector<double> values, probs;
    for (const std::string& tok : split_commas(args)) {
      size_t at = tok.find('@');
      if (at == std::string::npos)
        throw DomainError("--dist discrete needs v1@p1,v2@p2,...");
      try {
        values.push_back(std::stod(tok.substr(0, at)));
        probs.push_back(std::stod(tok.substr(at + 1)));
      } catch (const std::exception&) {
        throw DomainError("--dist discrete: cannot parse \"" + tok + "\"");
      }
    }
    return ScalarDistribution::discrete(values, probs);
  }
  throw DomainError("unknown distribution \"" + name +
                    "\"; valid: normal, uniform, exponential, discrete");
}

fs::path make_temp_dir() {
  std::string tmpl = (fs::temp_directory_path() / "bootagg-cli-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw IoError("cannot create temp directory");
  return fs::path(buf.data());
}

std::string replicate_name(std::int64_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "replicate_%04lld.png", static_cast<long long>(i));
  return buf;
}

// ---- run subcommand ------------------------------------------------------

struct RunOptions {
  std::string data_path;
  std::string renderer_cmd;
  std::string builtin_kind;
  std::int64_t n = 0;
  double coverage = -1.0;
  bool n_given = false;
  bool coverage_given = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out_path;
  std::string size_text = "900x450";
  double k = 2.5;
  double tau = 0.3;
  bool no_transform = false;
  int parallelism = 1;
  bool keep_stack = false;
  std::int64_t memory_cap = 0;

  // built-in renderer configuration
  std::string column;
  std::string x_column;
  std::string y_column;
  std::string statistic = "mean";
  int degree = 1;
  std::string category_column;
  std::string categories_text;
  std::string xlim_text;
  std::string ylim_text;
  int mark_size = 3;
  std::string mark_color = "0,0,0";
  int scatter_size = 2;
  std::string scatter_color = "160,160,160";
  double timeout = 60.0;
};

std::string first_numeric_column(const Dataset& data, const char* purpose) {
  for (const std::string& name : data.column_names())
    if (data.column_type(name) == ColumnType::numeric) return name;
  throw DomainError(std::string("dataset has no numeric column for ") + purpose);
}

std::string nth_numeric_column(const Dataset& data, int skip, const char* purpose) {
  int seen = 0;
  for (const std::string& name : data.column_names())
    if (data.column_type(name) == ColumnType::numeric) {
      if (seen == skip) return name;
      ++seen;
    }
  throw DomainError(std::string("dataset has too few numeric columns for ") + purpose);
}

std::string first_text_column(const Dataset& data, const char* purpose) {
  for (const std::string& name : data.column_names())
    if (data.column_type(name) == ColumnType::text) return name;
  throw DomainError(std::string("dataset has no text column for ") + purpose);
}

std::pair<double, double> padded_bounds(const std::vector<double>& values) {
  double lo = values.front(), hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double pad = lo == hi ? 1.0 : 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

RenderKind parse_builtin_kind(const std::string& text) {
  if (text == "point_estimate") return RenderKind::point_estimate;
  if (text == "regression_line") return RenderKind::regression_line;
  if (text == "bar_chart") return RenderKind::bar_chart;
  throw DomainError("unknown builtin renderer \"" + text +
                    "\"; valid: point_estimate, regression_line, bar_chart");
}

// Renders all n replicates with a bounded worker pool; sink(i, image) is
// called once per replicate, possibly from different threads but never twice
// for the same index.
void parallel_render(const Dataset& full,
                     const std::function<RasterImage(std::int64_t)>& render_one,
                     std::int64_t n, int parallelism,
                     const std::function<void(std::int64_t, RasterImage&&)>& sink) {
  (void)full;
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::int64_t error_index = -1;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        RasterImage img = render_one(i);
        sink(i, std::move(img));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error_index < 0 || i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
        return;
      }
    }
  };

  int workers = static_cast<int>(std::min<std::int64_t>(parallelism, n));
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(error);
}

int cmd_run(const RunOptions& opt) {
  Dataset data = load_dataset_csv_file(opt.data_path);
  if (data.row_count() == 0) throw DomainError("dataset has no data rows");

  std::int64_t n = opt.n;
  if (opt.coverage_given) n = required_n(opt.coverage);
  if (n < 1) throw DomainError("replicate count must be >= 1");

  const bool builtin = !opt.builtin_kind.empty();
  const SizeWH size = parse_size(opt.size_text);

  RenderSpec spec;
  PlotFrame frame;
  frame.width = size.w;
  frame.height = size.h;
  frame.background = kWhite;
  RendererCommand external;

  if (builtin) {
    spec.kind = parse_builtin_kind(opt.builtin_kind);
    spec.mark_size = opt.mark_size;
    spec.mark_color = parse_color(opt.mark_color, "--mark-color");
    spec.scatter_size = opt.scatter_size;
    spec.scatter_color = parse_color(opt.scatter_color, "--scatter-color");
    if (opt.statistic == "mean")
      spec.statistic = Statistic::mean;
    else if (opt.statistic == "median")
      spec.statistic = Statistic::median;
    else
      throw DomainError("unknown statistic \"" + opt.statistic +
                        "\"; valid: mean, median");

    switch (spec.kind) {
      case RenderKind::point_estimate: {
        spec.value_column =
            opt.column.empty() ? first_numeric_column(data, "the value column")
                               : opt.column;
        auto xlim = opt.xlim_text.empty()
                        ? padded_bounds(data.numeric_column(spec.value_column))
                        : parse_range(opt.xlim_text, "--xlim");
        auto ylim = opt.ylim_text.empty()
                        ? std::pair<double, double>{-1.0, 1.0}
                        : parse_range(opt.ylim_text, "--ylim");
        frame.x_min = xlim.first;
        frame.x_max = xlim.second;
        frame.y_min = ylim.first;
        frame.y_max = ylim.second;
        break;
      }
      case RenderKind::regression_line: {
        spec.x_column = opt.x_column.empty()
                            ? nth_numeric_column(data, 0, "the x column")
                            : opt.x_column;
        spec.y_column = opt.y_column.empty()
                            ? nth_numeric_column(data, 1, "the y column")
                            : opt.y_column;
        spec.degree = opt.degree;
        auto xlim = opt.xlim_text.empty()
                        ? padded_bounds(data.numeric_column(spec.x_column))
                        : parse_range(opt.xlim_text, "--xlim");
        auto ylim = opt.ylim_text.empty()
                        ? padded_bounds(data.numeric_column(spec.y_column))
                        : parse_range(opt.ylim_text, "--ylim");
        frame.x_min = xlim.first;
        frame.x_max = xlim.second;
        frame.y_min = ylim.first;
        frame.y_max = ylim.second;
        break;
      }
      case RenderKind::bar_chart: {
        spec.category_column =
            opt.category_column.empty()
                ? first_text_column(data, "the category column")
                : opt.category_column;
        if (!opt.categories_text.empty()) {
          spec.categories = split_commas(opt.categories_text);
        } else {
          size_t idx = data.column_index(spec.category_column);
          std::vector<std::string> cats;
          for (const auto& row : data.rows()) cats.push_back(row[idx]);
          std::sort(cats.begin(), cats.end());
          cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
          spec.categories = cats;
        }
        frame.x_min = 0.0;
        frame.x_max = 1.0;
        frame.y_min = 0.0;
        frame.y_max = 1.0;
        break;
      }
    }
    spec.validate();
    frame.validate();
  } else {
    external.command_template = opt.renderer_cmd;
    external.timeout_seconds = opt.timeout;
    external.validate();
  }

  TransformParams params;
  params.slope = opt.k;
  params.threshold = opt.tau;
  params.enabled = !opt.no_transform;
  params.validate();

  // Configuration echo: every effective parameter, defaults included.
  echo("command", "run");
  echo("data", opt.data_path);
  if (builtin) {
    echo("renderer", "builtin");
    echo("builtin", opt.builtin_kind);
    switch (spec.kind) {
      case RenderKind::point_estimate:
        echo("column", spec.value_column);
        echo("statistic", opt.statistic);
        break;
      case RenderKind::regression_line:
        echo("x_column", spec.x_column);
        echo("y_column", spec.y_column);
        echo("degree", std::to_string(spec.degree));
        break;
      case RenderKind::bar_chart: {
        echo("category_column", spec.category_column);
        std::string joined;
        for (size_t i = 0; i < spec.categories.size(); ++i) {
          if (i) joined += ",";
          joined += spec.categories[i];
        }
        echo("categories", joined);
        break;
      }
    }
    echo("xlim", fmt_g(frame.x_min) + ":" + fmt_g(frame.x_max));
    echo("ylim", fmt_g(frame.y_min) + ":" + fmt_g(frame.y_max));
    echo("mark_size", std::to_string(spec.mark_size));
    echo("mark_color", opt.mark_color);
    if (spec.kind == RenderKind::regression_line) {
      echo("scatter_size", std::to_string(spec.scatter_size));
      echo("scatter_color", opt.scatter_color);
    }
  } else {
    echo("renderer", "external");
    echo("renderer_cmd", opt.renderer_cmd);
    echo("timeout", fmt_g(opt.timeout));
  }
  if (opt.coverage_given) echo("coverage_requested", fmt_g(opt.coverage));
  echo("n", std::to_string(n));
  echo("seed", std::to_string(opt.seed));
  echo("out", opt.out_path);
  echo("size", std::to_string(size.w) + "x" + std::to_string(size.h));
  echo("k", fmt_g(opt.k));
  echo("tau", fmt_g(opt.tau));
  echo("transform", params.enabled ? "on" : "off");
  echo("parallelism", std::to_string(opt.parallelism));
  echo("keep_stack", opt.keep_stack ? "on" : "off");
  echo("memory_cap", std::to_string(opt.memory_cap));
  echo("implied_coverage", format_fraction_4dp(n - 1, n + 1));
  echo("jeffreys_mean", format_fraction_4dp(2 * n + 1, 2 * n + 2));

  // Stack directory: required by --keep-stack, also used as spill space when
  // a memory cap forces the tiled aggregation path.
  const std::int64_t stack_bytes = n * size.w * size.h * 3;
  const bool spill = opt.memory_cap > 0 && stack_bytes > opt.memory_cap;
  fs::path stack_dir;
  bool stack_dir_is_temp = false;
  if (opt.keep_stack) {
    fs::path outp(opt.out_path);
    stack_dir = outp.parent_path() / (outp.stem().string() + "_stack");
    fs::create_directories(stack_dir);
    echo("stack_dir", stack_dir.string());
  } else if (spill) {
    stack_dir = make_temp_dir();
    stack_dir_is_temp = true;
  }

  SeededRng root(opt.seed);
  auto builtin_render_one = [&](std::int64_t i) {
    SeededRng rng = root.substream(static_cast<std::uint64_t>(i));
    Dataset resample = bootstrap_resample(data, rng);
    return render_builtin(resample, data, frame, spec);
  };

  AggregateImage agg(size.w, size.h);
  try {
    if (spill) {
      // Render to disk, then aggregate a band of rows at a time.
      std::vector<std::string> files(static_cast<size_t>(n));
      for (std::int64_t i = 0; i < n; ++i)
        files[static_cast<size_t>(i)] = (stack_dir / replicate_name(i)).string();
      auto sink = [&](std::int64_t i, RasterImage&& img) {
        write_png_file(files[static_cast<size_t>(i)], img);
      };
      if (builtin) {
        parallel_render(data, builtin_render_one, n, opt.parallelism, sink);
      } else {
        auto render_one = [&](std::int64_t i) {
          SeededRng rng = root.substream(static_cast<std::uint64_t>(i));
          Dataset resample = bootstrap_resample(data, rng);
          return invoke_renderer(external, resample, data, i, size.w, size.h);
        };
        parallel_render(data, render_one, n, opt.parallelism, sink);
      }

      std::int64_t rows_per_tile =
          std::max<std::int64_t>(1, opt.memory_cap / (n * size.w * 3));
      rows_per_tile = std::min(rows_per_tile, size.h);
      for (std::int64_t row0 = 0; row0 < size.h; row0 += rows_per_tile) {
        std::int64_t count = std::min(rows_per_tile, size.h - row0);
        std::vector<RasterImage> slices;
        slices.reserve(static_cast<size_t>(n));
        for (const std::string& f : files)
          slices.push_back(read_png_file(f).rows_slice(row0, count));
        ImageStack tile(std::move(slices));
        AggregateImage tile_agg = transform_aggregate(tile, params);
        for (std::int64_t r = 0; r < count; ++r)
          for (std::int64_t col = 0; col < size.w; ++col)
            for (int ch = 0; ch < 3; ++ch)
              agg.set_channel(col, row0 + r, ch, tile_agg.channel(col, r, ch));
      }
    } else {
      std::vector<std::optional<RasterImage>> slots(static_cast<size_t>(n));
      if (builtin) {
        auto sink = [&](std::int64_t i, RasterImage&& img) {
          slots[static_cast<size_t>(i)] = std::move(img);
        };
        parallel_render(data, builtin_render_one, n, opt.parallelism, sink);
      } else {
        std::vector<Dataset> resamples = resample_stream(data, n, root);
        ImageStack stack =
            render_stack(external, resamples, data, size.w, size.h, opt.parallelism);
        for (std::int64_t i = 0; i < n; ++i)
          slots[static_cast<size_t>(i)] = stack.image(i);
      }
      std::vector<RasterImage> images;
      images.reserve(static_cast<size_t>(n));
      for (auto& s : slots) images.push_back(std::move(*s));
      ImageStack stack(std::move(images));
      if (opt.keep_stack)
        for (std::int64_t i = 0; i < n; ++i)
          write_png_file((stack_dir / replicate_name(i)).string(), stack.image(i));
      agg = transform_aggregate(stack, params);
    }
  } catch (const DimensionMismatchError& e) {
    // Wrong-sized external output is a protocol violation, not a config error.
    throw RendererError(e.what());
  }

  write_png_file(opt.out_path, quantize(agg));
  echo("wrote", opt.out_path);

  if (stack_dir_is_temp) {
    std::error_code ec;
    fs::remove_all(stack_dir, ec);
  }
  return 0;
}

// ---- aggregate subcommand ------------------------------------------------

struct AggregateOptions {
  std::string input_dir;
  std::string out_path;
  double k = 2.5;
  double tau = 0.3;
  bool no_transform = false;
  std::int64_t memory_cap = 0;
};

int cmd_aggregate(const AggregateOptions& opt) {
  std::vector<std::string> files;
  {
    std::error_code ec;
    fs::directory_iterator it(opt.input_dir, ec);
    if (ec) throw IoError("cannot read directory " + opt.input_dir);
    for (const auto& entry : it) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      for (char& c : ext) c = static_cast<char>(std::tolower(c));
      if (ext == ".png") files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DomainError("no PNG files found in " + opt.input_dir);

  TransformParams params;
  params.slope = opt.k;
  params.threshold = opt.tau;
  params.enabled = !opt.no_transform;
  params.validate();

  echo("command", "aggregate");
  echo("input", opt.input_dir);
  echo("images", std::to_string(files.size()));
  echo("out", opt.out_path);
  echo("k", fmt_g(opt.k));
  echo("tau", fmt_g(opt.tau));
  echo("transform", params.enabled ? "on" : "off");
  echo("memory_cap", std::to_string(opt.memory_cap));

  const std::int64_t n = static_cast<std::int64_t>(files.size());
  RasterImage first = read_png_file(files[0]);
  const std::int64_t w = first.width(), h = first.height();
  const std::int64_t stack_bytes = n * w * h * 3;

  AggregateImage agg(w, h);
  if (opt.memory_cap > 0 && stack_bytes > opt.memory_cap) {
    std::int64_t rows_per_tile =
        std::max<std::int64_t>(1, opt.memory_cap / (n * w * 3));
    rows_per_tile = std::min(rows_per_tile, h);
    for (std::int64_t row0 = 0; row0 < h; row0 += rows_per_tile) {
      std::int64_t count = std::min(rows_per_tile, h - row0);
      std::vector<RasterImage> slices;
      slices.reserve(static_cast<size_t>(n));
      for (const std::string& f : files) {
        RasterImage img = read_png_file(f);
        if (img.width() != w || img.height() != h)
          throw DimensionMismatchError(files[0] + " is " + std::to_string(w) + "x" +
                                       std::to_string(h) + " but " + f + " is " +
                                       std::to_string(img.width()) + "x" +
                                       std::to_string(img.height()));
        slices.push_back(img.rows_slice(row0, count));
      }
      ImageStack tile(std::move(slices));
      AggregateImage tile_agg = transform_aggregate(tile, params);
      for (std::int64_t r = 0; r < count; ++r)
        for (std::int64_t col = 0; col < w; ++col)
          for (int ch = 0; ch < 3; ++ch)
            agg.set_channel(col, row0 + r, ch, tile_agg.channel(col, r, ch));
    }
  } else {
    std::vector<RasterImage> images;
    images.reserve(files.size());
    images.push_back(std::move(first));
    for (size_t i = 1; i < files.size(); ++i) {
      RasterImage img = read_png_file(files[i]);
      if (img.width() != w || img.height() != h)
        throw DimensionMismatchError(files[0] + " is " + std::to_string(w) + "x" +
                                     std::to_string(h) + " but " + files[i] + " is " +
                                     std::to_string(img.width()) + "x" +
                                     std::to_string(img.height()));
      images.push_back(std::move(img));
    }
    ImageStack stack(std::move(images));
    agg = transform_aggregate(stack, params);
  }

  write_png_file(opt.out_path, quantize(agg));
  echo("wrote", opt.out_path);
  return 0;
}

// ---- coverage subcommand -------------------------------------------------

struct CoverageOptions {
  std::int64_t n = 0;
  double coverage = -1.0;
  bool n_given = false;
  bool coverage_given = false;
  double alpha = 0.05;
};

int cmd_coverage(const CoverageOptions& opt) {
  std::int64_t n = opt.n;
  if (opt.coverage_given) n = required_n(opt.coverage);
  if (n < 1) throw DomainError("n must be >= 1");
  CoverageSpec spec{n, opt.alpha};
  spec.validate();

  echo("command", "coverage");
  if (opt.coverage_given) echo("coverage_requested", fmt_g(opt.coverage));
  echo("n", std::to_string(n));
  echo("alpha", fmt_g(opt.alpha));
  echo("implied_coverage", format_fraction_4dp(n - 1, n + 1));
  echo("jeffreys_mean", format_fraction_4dp(2 * n + 1, 2 * n + 2));
  RegionInferenceResult res = jeffreys_interval(n, spec);
  echo("jeffreys_lower", fmt_f4(res.jeffreys_lower));
  return 0;
}

// ---- simulate subcommand -------------------------------------------------

struct SimulateOptions {
  std::string scenario;
  std::string dist_text = "normal:0,1";
  std::int64_t n = 39;
  std::int64_t trials = 0;
  bool trials_given = false;
  std::uint64_t seed = kDefaultSeed;
  double alpha = 0.05;
  double threshold = 0.0;
  std::int64_t rows = 50;
  std::string size_text = "300x150";
  std::string xlim_text = "-6:6";
  int mark_size = 3;
};

void print_coverage_report(const CoverageReport& r) {
  echo("n", std::to_string(r.n));
  echo("trials", std::to_string(r.trials));
  echo("hits", std::to_string(r.hits));
  echo("estimate", fmt_f6(r.estimate));
  echo("theoretical", fmt_f6(r.theoretical));
  echo("mc_std_error", fmt_f6(r.mc_std_error));
}

int cmd_simulate(const SimulateOptions& opt) {
  if (opt.scenario != "range" && opt.scenario != "pipeline" &&
      opt.scenario != "region")
    throw DomainError("unknown scenario \"" + opt.scenario +
                      "\"; valid: range, pipeline, region");

  ScalarDistribution dist = parse_distribution(opt.dist_text);
  std::int64_t trials = opt.trials;
  if (!opt.trials_given)
    trials = opt.scenario == "range" ? 10000 : (opt.scenario == "pipeline" ? 1000 : 2000);

  echo("command", "simulate");
  echo("scenario", opt.scenario);
  echo("dist", opt.dist_text);
  echo("seed", std::to_string(opt.seed));

  SeededRng rng(opt.seed);
  if (opt.scenario == "range") {
    CoverageReport r = simulate_range_coverage(dist, opt.n, trials, rng);
    print_coverage_report(r);
  } else if (opt.scenario == "pipeline") {
    SizeWH size = parse_size(opt.size_text);
    auto xlim = parse_range(opt.xlim_text, "--xlim");
    PlotFrame frame;
    frame.x_min = xlim.first;
    frame.x_max = xlim.second;
    frame.y_min = -1.0;
    frame.y_max = 1.0;
    frame.width = size.w;
    frame.height = size.h;
    frame.background = kWhite;
    RenderSpec spec;
    spec.kind = RenderKind::point_estimate;
    spec.value_column = "value";
    spec.mark_size = opt.mark_size;
    echo("size", std::to_string(size.w) + "x" + std::to_string(size.h));
    echo("xlim", fmt_g(frame.x_min) + ":" + fmt_g(frame.x_max));
    echo("mark_size", std::to_string(spec.mark_size));
    echo("rows", std::to_string(opt.rows));
    CoverageReport r =
        simulate_pipeline_coverage(dist, opt.n, trials, frame, spec, rng, opt.rows);
    print_coverage_report(r);
  } else {
    echo("threshold", fmt_g(opt.threshold));
    echo("alpha", fmt_g(opt.alpha));
    RegionInferenceReport r =
        simulate_region_inference(dist, opt.n, opt.threshold, trials, rng, opt.alpha);
    echo("n", std::to_string(r.n));
    echo("trials", std::to_string(r.trials));
    echo("valid_trials", std::to_string(r.valid_trials));
    echo("validity", fmt_f6(r.validity));
    echo("true_p", fmt_f6(r.true_p));
    echo("mean_lower", fmt_f6(r.mean_lower));
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Bootstrap-resample a dataset, render one plot per resample, and "
               "aggregate the stack into a single uncertainty image."};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "End-to-end: resample, render, aggregate");
  run->add_option("--data", run_opt.data_path, "Input CSV dataset")->required();
  auto* opt_renderer =
      run->add_option("--renderer-cmd", run_opt.renderer_cmd,
                      "External renderer template with {resample} {full} {out} "
                      "{width} {height} {index}");
  auto* opt_builtin = run->add_option(
      "--builtin", run_opt.builtin_kind,
      "Built-in renderer: point_estimate, regression_line, bar_chart");
  opt_renderer->excludes(opt_builtin);
  opt_builtin->excludes(opt_renderer);
  auto* opt_n = run->add_option("--n", run_opt.n, "Number of bootstrap replicates");
  auto* opt_cov = run->add_option("--coverage", run_opt.coverage,
                                  "Target coverage; picks the smallest adequate n");
  opt_n->excludes(opt_cov);
  opt_cov->excludes(opt_n);
  run->add_option("--seed", run_opt.seed, "RNG seed (default 1729)");
  run->add_option("--out", run_opt.out_path, "Output PNG path")->required();
  run->add_option("--size", run_opt.size_text, "Output size WxH (default 900x450)");
  run->add_option("--k", run_opt.k, "Transform slope (default 2.5)");
  run->add_option("--tau", run_opt.tau, "Transform threshold (default 0.3)");
  run->add_flag("--no-transform", run_opt.no_transform,
                "Plain mean aggregation, no intensity transform");
  run->add_option("--parallelism", run_opt.parallelism,
                  "Max concurrent renders (default 1)");
  run->add_flag("--keep-stack", run_opt.keep_stack,
                "Keep the per-replicate PNGs next to the output");
  run->add_option("--memory-cap", run_opt.memory_cap,
                  "Stack memory budget in bytes; exceeding it streams row tiles");
  run->add_option("--column", run_opt.column, "Value column (point_estimate)");
  run->add_option("--x-column", run_opt.x_column, "X column (regression_line)");
  run->add_option("--y-column", run_opt.y_column, "Y column (regression_line)");
  run->add_option("--statistic", run_opt.statistic,
                  "point_estimate statistic: mean or median");
  run->add_option("--degree", run_opt.degree, "Polynomial degree (default 1)");
  run->add_option("--category-column", run_opt.category_column,
                  "Category column (bar_chart)");
  run->add_option("--categories", run_opt.categories_text,
                  "Comma-separated category order (bar_chart)");
  run->add_option("--xlim", run_opt.xlim_text, "Data x bounds LO:HI");
  run->add_option("--ylim", run_opt.ylim_text, "Data y bounds LO:HI");
  run->add_option("--mark-size", run_opt.mark_size, "Mark size in px (default 3)");
  run->add_option("--mark-color", run_opt.mark_color, "Mark color R,G,B");
  run->add_option("--scatter-size", run_opt.scatter_size,
                  "Background scatter size (default 2)");
  run->add_option("--scatter-color", run_opt.scatter_color,
                  "Background scatter color R,G,B");
  run->add_option("--timeout", run_opt.timeout,
                  "External renderer timeout in seconds (default 60)");

  AggregateOptions agg_opt;
  CLI::App* agg = app.add_subcommand("aggregate", "Aggregate a directory of PNGs");
  agg->add_option("--input", agg_opt.input_dir, "Directory of same-sized PNGs")
      ->required();
  agg->add_option("--out", agg_opt.out_path, "Output PNG path")->required();
  agg->add_option("--k", agg_opt.k, "Transform slope (default 2.5)");
  agg->add_option("--tau", agg_opt.tau, "Transform threshold (default 0.3)");
  agg->add_flag("--no-transform", agg_opt.no_transform,
                "Plain mean aggregation, no intensity transform");
  agg->add_option("--memory-cap", agg_opt.memory_cap,
                  "Stack memory budget in bytes; exceeding it streams row tiles");

  CoverageOptions cov_opt;
  CLI::App* cov = app.add_subcommand("coverage", "Coverage arithmetic for a given n");
  auto* cov_n = cov->add_option("--n", cov_opt.n, "Number of replicates");
  auto* cov_c = cov->add_option("--coverage", cov_opt.coverage,
                                "Target coverage; picks the smallest adequate n");
  cov_n->excludes(cov_c);
  cov_c->excludes(cov_n);
  cov->add_option("--alpha", cov_opt.alpha, "One-sided level (default 0.05)");

  SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo coverage checks");
  sim->add_option("scenario", sim_opt.scenario, "range, pipeline, or region")
      ->required();
  sim->add_option("--dist", sim_opt.dist_text,
                  "normal:MU,SIGMA | uniform:A,B | exponential:RATE | "
                  "discrete:v1@p1,v2@p2,...");
  sim->add_option("--n", sim_opt.n, "Number of samples per trial (default 39)");
  auto* sim_trials = sim->add_option("--trials", sim_opt.trials,
                                     "Trials (defaults: range 10000, pipeline "
                                     "1000, region 2000)");
  sim->add_option("--seed", sim_opt.seed, "RNG seed (default 1729)");
  sim->add_option("--alpha", sim_opt.alpha, "Jeffreys level for region (default 0.05)");
  sim->add_option("--threshold", sim_opt.threshold, "Region threshold (default 0)");
  sim->add_option("--rows", sim_opt.rows, "Synthesized dataset rows (default 50)");
  sim->add_option("--size", sim_opt.size_text,
                  "Pipeline frame size WxH (default 300x150)");
  sim->add_option("--xlim", sim_opt.xlim_text, "Pipeline x bounds (default -6:6)");
  sim->add_option("--mark-size", sim_opt.mark_size, "Pipeline mark size (default 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  run_opt.n_given = opt_n->count() > 0;
  run_opt.coverage_given = opt_cov->count() > 0;
  cov_opt.n_given = cov_n->count() > 0;
  cov_opt.coverage_given = cov_c->count() > 0;
  sim_opt.trials_given = sim_trials->count() > 0;

  try {
    if (run->parsed()) {
      if (!run_opt.n_given && !run_opt.coverage_given)
        throw DomainError("run needs exactly one of --n or --coverage");
      if (run_opt.renderer_cmd.empty() && run_opt.builtin_kind.empty())
        throw DomainError("run needs exactly one of --renderer-cmd or --builtin");
      return cmd_run(run_opt);
    }
    if (agg->parsed()) return cmd_aggregate(agg_opt);
    if (cov->parsed()) {
      if (!cov_opt.n_given && !cov_opt.coverage_given)
        throw DomainError("coverage needs exactly one of --n or --coverage");
      return cmd_coverage(cov_opt);
    }
    if (sim->parsed()) return cmd_simulate(sim_opt);
    std::cerr << "error: no subcommand given\n";
    return 1;
  } catch (const RendererTimeout& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RendererError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bootagg
