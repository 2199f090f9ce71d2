#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace panda::prompt {

using PlaceholderValues = std::map<std::string, std::string, std::less<>>;

/// Substitutes `{name}` tokens. A token is a '{' followed by the shortest
/// run up to the next '}'; names are matched exactly (spaces included) and
/// substituted values are not rescanned. Every token in the template must
/// have a value, otherwise TemplateError.
std::string render(std::string_view tmpl, const PlaceholderValues& values);

/// Placeholder names appearing in a template, in order of first use.
std::vector<std::string> placeholders(std::string_view tmpl);

/// Built-in templates compiled from resources/templates/*.tmpl. The trailing
/// newline of each resource file is not part of the template.
std::string_view builtin_template(std::string_view id);
std::vector<std::string> builtin_template_ids();

namespace templates {
inline constexpr std::string_view kClassificationZeroShot = "classification_zero_shot";
inline constexpr std::string_view kClassificationCot = "classification_cot";
inline constexpr std::string_view kLearningClassification = "learning_classification";
inline constexpr std::string_view kLearningAgent = "learning_agent";
inline constexpr std::string_view kInferenceClassificationPanda = "inference_classification_panda";
inline constexpr std::string_view kInferenceAgentPanda = "inference_agent_panda";
inline constexpr std::string_view kInferenceAgent = "inference_agent";
}  // namespace templates

}  // namespace panda::prompt
