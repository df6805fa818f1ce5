#include "infoqa/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace infoqa::orch {

PromptSet PromptSet::load_dir(const std::filesystem::path& dir) {
  PromptSet set;
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("prompt directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto path = entry.path();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read prompt file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    if (path.extension() == ".txt") {
      // strip one trailing newline so rendered prompts do not end mid-template
      if (!content.empty() && content.back() == '\n') content.pop_back();
      set.templates_[path.stem().string()] = std::move(content);
    } else if (path.filename() == "VERSION") {
      while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
        content.pop_back();
      }
      set.version_ = content;
    }
  }
  if (set.templates_.empty()) {
    throw std::runtime_error("no prompt templates in " + dir.string());
  }
  return set;
}

const std::string& PromptSet::raw(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw std::runtime_error("unknown prompt template: " + name);
  }
  return it->second;
}

std::string PromptSet::render(const std::string& name,
                              const std::map<std::string, std::string>& fields) const {
  std::string out = raw(name);
  for (const auto& [key, value] : fields) {
    const std::string token = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = out.find(token, pos)) != std::string::npos) {
      out.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace infoqa::orch
