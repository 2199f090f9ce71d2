#include "panda/template.hpp"

#include <algorithm>

#include "builtin_templates.hpp"
#include "panda/error.hpp"

namespace panda::prompt {

namespace {

template <typename OnText, typename OnToken>
void scan(std::string_view tmpl, OnText on_text, OnToken on_token) {
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            on_text(tmpl.substr(pos));
            return;
        }
        const auto close = tmpl.find('}', open + 1);
        if (close == std::string_view::npos) {
            throw TemplateError("unterminated placeholder at offset " + std::to_string(open));
        }
        const auto name = tmpl.substr(open + 1, close - open - 1);
        if (name.empty() || name.find('{') != std::string_view::npos) {
            throw TemplateError("malformed placeholder at offset " + std::to_string(open));
        }
        on_text(tmpl.substr(pos, open - pos));
        on_token(name);
        pos = close + 1;
    }
}

}  // namespace

std::string render(std::string_view tmpl, const PlaceholderValues& values) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    scan(
        tmpl, [&](std::string_view text) { out.append(text); },
        [&](std::string_view name) {
            auto it = values.find(name);
            if (it == values.end()) {
                throw TemplateError("no value for placeholder {" + std::string(name) + "}");
            }
            out.append(it->second);
        });
    return out;
}

std::vector<std::string> placeholders(std::string_view tmpl) {
    std::vector<std::string> names;
    scan(
        tmpl, [](std::string_view) {},
        [&](std::string_view name) {
            if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
        });
    return names;
}

std::string_view builtin_template(std::string_view id) {
    for (const auto& t : detail::kBuiltinTemplates) {
        if (t.id == id) {
            auto body = t.body;
            if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
            return body;
        }
    }
    throw TemplateError("unknown template id \"" + std::string(id) + "\"");
}

std::vector<std::string> builtin_template_ids() {
    std::vector<std::string> ids;
    for (const auto& t : detail::kBuiltinTemplates) ids.emplace_back(t.id);
    return ids;
}

}  // namespace panda::prompt
