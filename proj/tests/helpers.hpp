#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "xmeval/annotation.hpp"
#include "xmeval/ranking.hpp"

namespace testutil {

// Self-cleaning scratch directory under the system temp root.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    static std::atomic<unsigned> counter{0};
    for (;;) {
      auto candidate = base / ("xmeval_test_" + std::to_string(::getpid()) + "_" +
                               std::to_string(counter++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string dir() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs a shell command, returns its exit status (not the raw wait status).
inline int run_command(const std::string& command) {
  int status = std::system(command.c_str());
  if (status == -1) return -1;
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

inline std::string shell_quote(const std::string& s) { return "'" + s + "'"; }

// Small similarity matrix with the given scores, gallery g0..g{n-1}.
inline xmeval::SimilarityMatrix make_matrix(
    const std::vector<std::string>& queries,
    const std::vector<std::string>& gallery, const std::vector<double>& scores,
    xmeval::Modality modality = xmeval::Modality::Image) {
  xmeval::SimilarityMatrix m;
  m.query_modality = modality;
  m.queries = queries;
  m.gallery = gallery;
  m.scores = scores;
  m.validate();
  return m;
}

inline std::string item_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
  return buf;
}

// Deterministic per-test RNG; tests pass distinct seeds so failures stay
// reproducible.
inline std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

}  // namespace testutil
