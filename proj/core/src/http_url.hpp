#pragma once

#include "bbench/errors.hpp"

#include <string>
#include <string_view>

namespace bbench::detail {

struct ParsedUrl {
    std::string host;
    int port = 80;
    std::string path = "/";
};

inline ParsedUrl parse_url(const std::string& url) {
    constexpr std::string_view scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ConfigError("URL must start with http://: " + url);
    }
    const std::string rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    const std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    ParsedUrl out;
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const auto colon = hostport.find(':');
    if (colon == std::string::npos) {
        out.host = hostport;
    } else {
        out.host = hostport.substr(0, colon);
        out.port = std::stoi(hostport.substr(colon + 1));
    }
    if (out.host.empty()) throw ConfigError("URL has no host: " + url);
    return out;
}

} // namespace bbench::detail
