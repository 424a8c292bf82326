#pragma once

#include <map>
#include <string>

namespace tabattr {

// Named prompt templates with {placeholder} substitution. Templates are plain
// text files, one per agent; built-in copies keep the library usable without
// a template directory on disk.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    // Loads every *.txt in `dir` (stem = template name); missing names fall
    // back to the built-in copy.
    static PromptLibrary from_dir(const std::string& dir);

    const std::string& raw(const std::string& name) const;
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& vars) const;

    const std::map<std::string, std::string>& all() const { return templates_; }

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace tabattr
