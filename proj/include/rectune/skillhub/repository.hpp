#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "rectune/skillhub/skill.hpp"

namespace rectune::skills {

// skills/<name>/v<N>.json, one immutable file per version.
class SkillRepository {
 public:
  explicit SkillRepository(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const noexcept { return root_; }

  fs::path path_for(const std::string& name, int version) const {
    return root_ / name / ("v" + std::to_string(version) + ".json");
  }

  std::vector<int> versions(const std::string& name) const {
    std::vector<int> out;
    const fs::path dir = root_ / name;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string stem = e.path().stem().string();
      if (e.path().extension() != ".json" || is_temp_file(e.path()) || stem.size() < 2 || stem[0] != 'v') continue;
      try {
        out.push_back(std::stoi(stem.substr(1)));
      } catch (const std::exception&) {
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Skill load(const std::string& name, int version) const {
    Skill s = load_skill(path_for(name, version));
    if (s.version != version)
      throw ValidationError("file declares version " + std::to_string(s.version), path_for(name, version).string());
    return s;
  }

  Skill latest(const std::string& name) const {
    auto v = versions(name);
    if (v.empty()) throw StorageError("no versions of skill '" + name + "' under " + root_.string());
    return load(name, v.back());
  }

  // Writes a new version; the version must exceed every stored one.
  void publish(const Skill& s) const {
    s.validate();
    auto v = versions(s.name);
    if (!v.empty() && s.version <= v.back())
      throw StateError("skill '" + s.name + "' version " + std::to_string(s.version) +
                       " does not exceed stored version " + std::to_string(v.back()));
    write_json(path_for(s.name, s.version), to_json(s));
  }

 private:
  fs::path root_;
};

}  // namespace rectune::skills
