#pragma once

// Data files from data/, compiled into the library.

#include <string_view>

namespace semforge::defaults {

std::string_view vocabulary_toml();
std::string_view prompt_template();
std::string_view tooltip_prompt();
std::string_view stylesheet();

}  // namespace semforge::defaults
