#pragma once
#include <zsl/corpus.hpp>
#include <zsl/types.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace test {

inline std::filesystem::path data_dir() { return ZSL_DATA_DIR; }

inline zsl::DatasetProfile shipped_profile(const std::string& name) {
  return zsl::load_profile(data_dir() / "profiles" / (name + ".json"));
}

inline const std::vector<std::string>& shipped_profile_names() {
  static const std::vector<std::string> names{"api_reviews", "gerrit",  "github",        "gitter",
                                              "google_play", "jira",    "stack_overflow"};
  return names;
}

inline zsl::DatasetProfile make_profile(std::vector<std::string> classes, std::string noun = "app review",
                                        std::string name = "t") {
  zsl::DatasetProfile p;
  p.name = std::move(name);
  p.classes = std::move(classes);
  p.instance_noun = std::move(noun);
  return p;
}

/// Instances in class blocks, ids "<cls>-<n>".
inline zsl::Dataset synthetic(const zsl::DatasetProfile& profile,
                              const std::vector<std::pair<std::string, std::size_t>>& counts) {
  zsl::Dataset ds;
  ds.profile = profile;
  for (const auto& [cls, n] : counts) {
    for (std::size_t i = 0; i < n; ++i)
      ds.instances.push_back({cls + "-" + std::to_string(i), "text " + cls + " " + std::to_string(i), cls});
    ds.counts[cls] += n;
  }
  return ds;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("zsl-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
