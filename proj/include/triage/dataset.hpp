#pragma once

#include "triage/commit.hpp"
#include "triage/error.hpp"
#include "triage/model.hpp"
#include "triage/nvd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace triage::ingest {

/// First reference URL that names a supported commit.
std::optional<std::string> first_commit_url(const RawCveEntry& entry);

/// Combines feed metadata and a fetched commit. Files carry their pre-change
/// content verbatim and the diff's deleted lines as buggy lines; methods are
/// left for code extraction.
EnrichedRecord assemble_record(const RawCveEntry& entry, const CommitData& commit);

namespace detail {

/// Fisher–Yates over mt19937_64 with rejection sampling, so the permutation for
/// a seed is identical on every standard library.
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(r % bound)]);
    }
    return idx;
}

}  // namespace detail

template <typename T>
struct Split {
    std::vector<T> evaluation;
    std::vector<T> finetune;
};

/// Deterministic for a seed. The evaluation side receives
/// floor(n * eval_fraction) items, the rest go to fine-tuning; each side keeps
/// the input order.
template <typename T>
Split<T> split_dataset(const std::vector<T>& records, double eval_fraction, std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        throw ConfigError("eval_fraction must lie strictly between 0 and 1");
    const std::size_t n = records.size();
    const auto eval_n = static_cast<std::size_t>(std::floor(static_cast<double>(n) * eval_fraction + 1e-9));
    auto perm = detail::permutation(n, seed);
    std::vector<bool> in_eval(n, false);
    for (std::size_t i = 0; i < eval_n; ++i)
        in_eval[perm[i]] = true;
    Split<T> out;
    for (std::size_t i = 0; i < n; ++i)
        (in_eval[i] ? out.evaluation : out.finetune).push_back(records[i]);
    return out;
}

/// Uniform sample without replacement, returned in input order.
template <typename T>
std::vector<T> sample_evaluation(const std::vector<T>& records, std::size_t n, std::uint64_t seed) {
    if (n > records.size())
        throw SampleTooLarge("cannot sample " + std::to_string(n) + " of " + std::to_string(records.size()) +
                             " records");
    auto perm = detail::permutation(records.size(), seed);
    std::vector<std::size_t> chosen(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(chosen.begin(), chosen.end());
    std::vector<T> out;
    out.reserve(n);
    for (auto i : chosen)
        out.push_back(records[i]);
    return out;
}

// ---------------------------------------------------------------------------
// On-disk dataset
// ---------------------------------------------------------------------------

enum class SplitSide { Evaluation, Finetune };

std::string_view to_string(SplitSide side);

struct ManifestEntry {
    std::string cve;
    std::string hash;  // SHA-256 of the record document
    SplitSide split = SplitSide::Evaluation;
    GroundTruth ground_truth;
    std::vector<PromptVariant> variants;  // variants that passed the filters
};

struct DatasetManifest {
    std::uint64_t seed = 0;
    double eval_fraction = 0.5;
    std::vector<ManifestEntry> records;  // sorted by CVE id
};

/// Content-addressed layout: `records/<hh>/<sha256>.json` plus `manifest.json`.
class DatasetStore {
public:
    explicit DatasetStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }

    /// Writes a record and returns its hash.
    std::string put(const EnrichedRecord& record) const;
    /// Loads a record and checks its hash.
    EnrichedRecord get(const std::string& hash) const;

    void write_manifest(const DatasetManifest& manifest) const;
    DatasetManifest read_manifest() const;

private:
    std::filesystem::path record_path(const std::string& hash) const;
    std::filesystem::path root_;
};

}  // namespace triage::ingest
