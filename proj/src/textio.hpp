#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace latwave {

// Fixed significant-digit formatting: 17 digits round-trip doubles exactly
// (JSON artifacts), 12 keep CSV readable. Both are locale-independent, so
// repeated runs emit byte-identical files.
inline std::string fmt_g(double x, int sig) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", sig, x);
    return buf;
}
inline std::string fmt12(double x) { return fmt_g(x, 12); }
inline std::string fmt17(double x) { return fmt_g(x, 17); }

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

// Insertion-ordered JSON object builder. Values are emitted with fmt17 so
// output is deterministic; non-finite doubles become null.
class JsonObj {
public:
    JsonObj& num(const std::string& k, double v) {
        return put(k, std::isfinite(v) ? fmt17(v) : std::string("null"));
    }
    JsonObj& integer(const std::string& k, long long v) {
        return put(k, std::to_string(v));
    }
    JsonObj& boolean(const std::string& k, bool v) {
        return put(k, v ? "true" : "false");
    }
    JsonObj& str(const std::string& k, const std::string& v) {
        return put(k, "\"" + json_escape(v) + "\"");
    }
    JsonObj& raw(const std::string& k, const std::string& json) { return put(k, json); }

    // multi-line form used for file artifacts
    std::string build() const {
        std::string out = "{\n";
        for (size_t i = 0; i < parts_.size(); ++i) {
            out += "  " + parts_[i];
            if (i + 1 < parts_.size()) out += ",";
            out += "\n";
        }
        out += "}\n";
        return out;
    }
    // single-line form used when nesting inside another object or array
    std::string inline_build() const {
        std::string out = "{";
        for (size_t i = 0; i < parts_.size(); ++i) {
            if (i) out += ", ";
            out += parts_[i];
        }
        out += "}";
        return out;
    }

private:
    JsonObj& put(const std::string& k, const std::string& v) {
        parts_.push_back("\"" + json_escape(k) + "\": " + v);
        return *this;
    }
    std::vector<std::string> parts_;
};

inline std::string json_array(const std::vector<double>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += std::isfinite(xs[i]) ? fmt17(xs[i]) : std::string("null");
    }
    out += "]";
    return out;
}

inline std::string json_array(const std::vector<std::string>& raws) {
    std::string out = "[";
    for (size_t i = 0; i < raws.size(); ++i) {
        if (i) out += ", ";
        out += raws[i];
    }
    out += "]";
    return out;
}

} // namespace latwave
