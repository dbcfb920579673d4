#pragma once

// Persistent result cache: a tab-separated append-only text file with one
// record per line,
//
//     sha256-hex-of-query \t canonical-query \t value
//
// On load, records are validated: the hash must match the query text and
// duplicate keys must agree.  A file that fails validation is rebuilt from
// its valid records, with a warning on stderr.

#include "selfmap/rational.hpp"
#include "selfmap/serialize.hpp"
#include "selfmap/sha256.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

namespace selfmap {

class ResultCache {
  public:
    explicit ResultCache(std::string path) : path_(std::move(path)) { load(); }

    std::optional<Rat> lookup(const std::string& query) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = records_.find(sha256_hex(query));
        if (it == records_.end()) return std::nullopt;
        ++hits_;
        return rat_parse(it->second.second);
    }

    void store(const std::string& query, const Rat& value) {
        std::lock_guard<std::mutex> lock(mu_);
        std::string key = sha256_hex(query);
        std::string val = rat_canonical(value);
        auto it = records_.find(key);
        if (it != records_.end()) {
            SELFMAP_CHECK(it->second.second == val, "cache holds a conflicting value");
            return;
        }
        records_.emplace(key, std::make_pair(query, val));
        std::ofstream out(path_, std::ios::app);
        if (out) out << key << '\t' << query << '\t' << val << '\n';
    }

    const std::string& path() const { return path_; }
    std::size_t size() const { return records_.size(); }
    std::size_t hits() const { return hits_; }
    bool rebuilt_on_load() const { return rebuilt_; }

  private:
    void load() {
        std::ifstream in(path_);
        if (!in) return;  // absent file: start empty
        bool corrupt = false;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::size_t t1 = line.find('\t');
            std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
            if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
                corrupt = true;
                continue;
            }
            std::string key = line.substr(0, t1);
            std::string query = line.substr(t1 + 1, t2 - t1 - 1);
            std::string val = line.substr(t2 + 1);
            if (key != sha256_hex(query)) {
                corrupt = true;
                continue;
            }
            try {
                rat_parse(val);
            } catch (const invalid_input&) {
                corrupt = true;
                continue;
            }
            auto it = records_.find(key);
            if (it != records_.end()) {
                if (it->second.second != val) corrupt = true;  // keep the first record
                continue;
            }
            records_.emplace(std::move(key), std::make_pair(std::move(query), std::move(val)));
        }
        in.close();
        if (corrupt) {
            std::fprintf(stderr, "warning: cache file '%s' was corrupt; rebuilt from %zu valid records\n",
                         path_.c_str(), records_.size());
            std::ofstream out(path_, std::ios::trunc);
            for (const auto& [key, qv] : records_)
                out << key << '\t' << qv.first << '\t' << qv.second << '\n';
            rebuilt_ = true;
        }
    }

    std::string path_;
    std::map<std::string, std::pair<std::string, std::string>> records_;
    std::mutex mu_;
    std::size_t hits_ = 0;
    bool rebuilt_ = false;
};

}  // namespace selfmap
