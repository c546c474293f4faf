#pragma once

#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testcfg {

/// `base` with every key assigned in `extra` replaced or appended.
inline std::string with(const std::string& base, const std::string& extra) {
    std::vector<std::pair<std::string, std::string>> kv;
    auto absorb = [&](const std::string& text) {
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find('=');
            if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
            std::string k = line.substr(0, eq);
            while (!k.empty() && k.back() == ' ') k.pop_back();
            bool replaced = false;
            for (auto& [key, l] : kv)
                if (key == k) {
                    l = line;
                    replaced = true;
                }
            if (!replaced) kv.emplace_back(k, line);
        }
    };
    absorb(base);
    absorb(extra);
    std::string out;
    for (const auto& [k, l] : kv) out += l + "\n";
    return out;
}

}  // namespace testcfg
