#pragma once

#include <string_view>

namespace cogspeech::detail {

extern const std::string_view kSyntaxRegistryText;
extern const std::string_view kContentUnitsText;
extern const std::string_view kDemonstrativesText;
extern const std::string_view kFunctionWordsText;
extern const std::string_view kLightVerbsText;

}  // namespace cogspeech::detail
