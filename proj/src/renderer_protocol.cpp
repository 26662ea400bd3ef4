#include "bootagg/renderer_protocol.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "bootagg/errors.hpp"
#include "bootagg/png_io.hpp"

extern char** environ;

namespace fs = std::filesystem;

namespace bootagg {

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

fs::path make_run_dir() {
  std::string tmpl = (fs::temp_directory_path() / "bootagg-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw IoError("cannot create temp directory");
  return fs::path(buf.data());
}

std::string padded(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld", static_cast<long long>(index));
  return buf;
}

std::string read_text_file(const fs::path& p, size_t cap = 8192) {
  std::ifstream in(p, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (text.size() > cap) text = text.substr(text.size() - cap);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
    text.pop_back();
  return text;
}

// Launches the substituted command and waits, killing the process group on
// timeout. Combined stdout/stderr goes to diag_path.
void run_command(const std::string& command, const std::string& workdir,
                 double timeout_seconds, std::int64_t index,
                 const fs::path& diag_path) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, diag_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  if (!workdir.empty())
    posix_spawn_file_actions_addchdir_np(&actions, workdir.c_str());

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setpgroup(&attr, 0);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);

  std::string index_env = "BOOTAGG_REPLICATE_INDEX=" + std::to_string(index);
  std::vector<char*> envp;
  for (char** e = environ; *e; ++e) envp.push_back(*e);
  envp.push_back(index_env.data());
  envp.push_back(nullptr);

  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr,
                       const_cast<char* const*>(argv), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0)
    throw RendererError("cannot launch renderer for replicate " +
                        std::to_string(index) + ": " + std::strerror(rc));

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  for (;;) {
    pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0)
      throw RendererError("waitpid failed for replicate " + std::to_string(index));
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      std::ostringstream msg;
      msg << "renderer for replicate " << index << " timed out after "
          << timeout_seconds << "s";
      throw RendererTimeout(msg.str());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::ostringstream msg;
    msg << "renderer for replicate " << index;
    if (WIFSIGNALED(status))
      msg << " was killed by signal " << WTERMSIG(status);
    else
      msg << " exited with status " << WEXITSTATUS(status);
    std::string diag = read_text_file(diag_path);
    if (!diag.empty()) msg << "\nrenderer output:\n" << diag;
    throw RendererError(msg.str());
  }
}

RasterImage invoke_in_dir(const RendererCommand& cmd, const fs::path& dir,
                          const fs::path& full_csv, const Dataset& resample,
                          std::int64_t index, std::int64_t width,
                          std::int64_t height) {
  const std::string tag = padded(index);
  const fs::path resample_csv = dir / ("resample_" + tag + ".csv");
  const fs::path out_png = dir / ("out_" + tag + ".png");
  const fs::path diag = dir / ("diag_" + tag + ".txt");

  {
    std::ofstream out(resample_csv, std::ios::binary);
    if (!out) throw IoError("cannot write " + resample_csv.string());
    resample.write_csv(out);
  }

  std::string command = cmd.command_template;
  replace_all(command, "{resample}", resample_csv.string());
  replace_all(command, "{full}", full_csv.string());
  replace_all(command, "{out}", out_png.string());
  replace_all(command, "{width}", std::to_string(width));
  replace_all(command, "{height}", std::to_string(height));
  replace_all(command, "{index}", std::to_string(index));

  run_command(command, cmd.workdir, cmd.timeout_seconds, index, diag);

  if (!fs::exists(out_png))
    throw RendererError("renderer for replicate " + std::to_string(index) +
                        " produced no output at " + out_png.string());
  RasterImage img = [&] {
    try {
      return read_png_file(out_png.string());
    } catch (const std::exception& e) {
      throw RendererError("renderer output for replicate " +
                          std::to_string(index) + " is not decodable: " + e.what());
    }
  }();
  if (img.width() != width || img.height() != height) {
    std::ostringstream msg;
    msg << "renderer output for replicate " << index << " is " << img.width()
        << "x" << img.height() << ", expected " << width << "x" << height;
    throw DimensionMismatchError(msg.str());
  }
  return img;
}

void write_full_csv(const Dataset& full, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  full.write_csv(out);
}

// Rethrows the in-flight exception with the retained temp dir appended to the
// message, keeping its concrete type so callers can still tell timeouts and
// dimension errors apart.
[[noreturn]] void rethrow_keeping_dir(const fs::path& dir) {
  const std::string note = " (renderer inputs kept in " + dir.string() + ")";
  try {
    throw;
  } catch (const RendererTimeout& e) {
    throw RendererTimeout(e.what() + note);
  } catch (const DimensionMismatchError& e) {
    throw DimensionMismatchError(e.what() + note);
  } catch (const RendererError& e) {
    throw RendererError(e.what() + note);
  } catch (const IoError& e) {
    throw IoError(e.what() + note);
  }
}

}  // namespace

void RendererCommand::validate() const {
  if (command_template.find("{resample}") == std::string::npos)
    throw DomainError("renderer command must contain {resample}");
  if (command_template.find("{out}") == std::string::npos)
    throw DomainError("renderer command must contain {out}");
  if (!(timeout_seconds > 0.0)) throw DomainError("renderer timeout must be positive");
}

RasterImage invoke_renderer(const RendererCommand& cmd, const Dataset& resample,
                            const Dataset& full, std::int64_t index,
                            std::int64_t width, std::int64_t height) {
  cmd.validate();
  if (resample.row_count() == 0 || full.row_count() == 0)
    throw DomainError("renderer needs nonempty datasets");
  if (width <= 0 || height <= 0) throw DomainError("output size must be positive");

  fs::path dir = make_run_dir();
  try {
    write_full_csv(full, dir / "full.csv");
    RasterImage img = invoke_in_dir(cmd, dir, dir / "full.csv", resample, index,
                                    width, height);
    std::error_code ec;
    fs::remove_all(dir, ec);
    return img;
  } catch (...) {
    rethrow_keeping_dir(dir);
  }
}

ImageStack render_stack(const RendererCommand& cmd,
                        const std::vector<Dataset>& resamples, const Dataset& full,
                        std::int64_t width, std::int64_t height, int parallelism) {
  cmd.validate();
  if (resamples.empty()) throw DomainError("render_stack needs at least one resample");
  if (parallelism < 1) throw DomainError("parallelism must be >= 1");
  for (size_t i = 0; i < resamples.size(); ++i) {
    if (resamples[i].column_names() != full.column_names())
      throw DomainError("resample " + std::to_string(i) +
                        " does not share the full dataset's columns");
  }

  const std::int64_t n = static_cast<std::int64_t>(resamples.size());
  fs::path dir = make_run_dir();
  write_full_csv(full, dir / "full.csv");

  std::vector<std::optional<RasterImage>> results(static_cast<size_t>(n));
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
        results[static_cast<size_t>(i)] =
            invoke_in_dir(cmd, dir, dir / "full.csv",
                          resamples[static_cast<size_t>(i)], i, width, height);
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

  const int workers = static_cast<int>(
      std::min<std::int64_t>(parallelism, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (failed.load()) {
    try {
      std::rethrow_exception(error);
    } catch (...) {
      rethrow_keeping_dir(dir);
    }
  }

  std::vector<RasterImage> images;
  images.reserve(static_cast<size_t>(n));
  for (auto& r : results) images.push_back(std::move(*r));
  std::error_code ec;
  fs::remove_all(dir, ec);
  return ImageStack(std::move(images));
}

}  // namespace bootagg
