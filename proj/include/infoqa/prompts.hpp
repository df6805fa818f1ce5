#pragma once

/**
 * Prompt templates, shipped as plain-text data files with {placeholder}
 * substitution. Every template instructs the model to end with
 * "FINAL ANSWER: ..."; the query-rewrite templates may answer with
 * "TERMINAL: ..." instead once the query is fully resolved.
 */

#include <filesystem>
#include <map>
#include <string>

namespace infoqa::orch {

class PromptSet {
 public:
  /// Load every *.txt under dir (stem becomes the template name).
  static PromptSet load_dir(const std::filesystem::path& dir);

  const std::string& raw(const std::string& name) const;
  bool has(const std::string& name) const { return templates_.count(name) != 0; }
  const std::string& version() const { return version_; }

  /// Replace each "{key}" with its value.
  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& fields) const;

 private:
  std::map<std::string, std::string> templates_;
  std::string version_ = "0";
};

}  // namespace infoqa::orch
