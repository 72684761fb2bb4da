#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mlcert {

// A registered datum: content digest of the payload plus the metadata needed
// for sequence-aware splitting and domain-coverage analysis.
struct DatumRecord {
    std::string digest;
    std::string locator;
    std::string sequence_id;
    nlohmann::json metadata = nlohmann::json::object();

    nlohmann::json to_json() const;
    static DatumRecord from_json(const nlohmann::json& j);
};

// A label attached to a datum. A datum may carry zero or many labels.
struct LabelRecord {
    std::string digest;       // digest of the label payload
    std::string target_datum; // digest of the labeled datum
    std::string schema;       // e.g. "runway-edges"

    nlohmann::json to_json() const;
    static LabelRecord from_json(const nlohmann::json& j);
};

enum class DatasetRole { kTraining, kValidation, kCertification };

std::string to_string(DatasetRole role);
DatasetRole dataset_role_from_string(const std::string& s);

// A versioned dataset: deduplicated digest lists plus a hash link to the
// parent version. The manifest digest covers the canonical serialization
// (sorted keys, compact separators), so any ancestor edit changes every
// descendant digest.
struct DatasetManifest {
    std::string name;
    std::uint64_t version = 1;
    DatasetRole role = DatasetRole::kTraining;
    std::vector<std::string> datum_digests;
    std::vector<std::string> label_digests;
    std::optional<std::string> parent;
    std::map<std::string, std::string> source_tags; // datum digest -> real|synthetic
    std::uint64_t last_order_id = 0;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
    std::string canonical_serialization() const;
    std::string digest() const;
};

// An auditable dataset modification. `modified` pairs replace one digest
// with another in a single step.
struct ChangeOrder {
    std::uint64_t id = 0;
    std::string author;
    std::string timestamp;
    std::vector<std::string> added;
    std::vector<std::string> removed;
    std::vector<std::pair<std::string, std::string>> modified;
    std::string reason;

    nlohmann::json to_json() const;
    static ChangeOrder from_json(const nlohmann::json& j);
};

// Everything needed to reproduce one training run.
struct TrainingRunRecord {
    std::string run_id;
    std::string architecture_id;
    nlohmann::json hyperparameters = nlohmann::json::object();
    std::optional<std::string> init_weights_digest;
    std::string final_weights_digest;
    std::vector<std::uint64_t> seeds;
    std::optional<std::string> environment_digest;
    std::vector<std::string> training_manifest_digests;
    std::vector<std::string> validation_manifest_digests;
    std::optional<std::string> logs_digest;

    nlohmann::json to_json() const;
    static TrainingRunRecord from_json(const nlohmann::json& j);
};

// Storage backend: content-addressed payload objects plus namespaced JSON
// documents (records, labels, manifests, orders, runs). Object writes are
// idempotent and append-only; a digest is never rebound.
class LineageStore {
public:
    enum class Kind { kDatum, kLabel, kManifest, kOrder, kRun };

    virtual ~LineageStore() = default;

    virtual std::string put_object(std::span<const unsigned char> payload) = 0;
    virtual std::optional<std::vector<unsigned char>> get_object(const std::string& digest) const = 0;
    virtual bool contains_object(const std::string& digest) const = 0;

    virtual void put_document(Kind kind, const std::string& key, const nlohmann::json& doc) = 0;
    virtual std::optional<nlohmann::json> get_document(Kind kind, const std::string& key) const = 0;
    virtual std::vector<std::string> list_documents(Kind kind) const = 0;
};

class MemoryLineageStore : public LineageStore {
public:
    std::string put_object(std::span<const unsigned char> payload) override;
    std::optional<std::vector<unsigned char>> get_object(const std::string& digest) const override;
    bool contains_object(const std::string& digest) const override;
    void put_document(Kind kind, const std::string& key, const nlohmann::json& doc) override;
    std::optional<nlohmann::json> get_document(Kind kind, const std::string& key) const override;
    std::vector<std::string> list_documents(Kind kind) const override;

    // Test hook: overwrite stored bytes without touching the digest key.
    void corrupt_object(const std::string& digest, std::vector<unsigned char> bytes);
    void drop_object(const std::string& digest);

private:
    std::map<std::string, std::vector<unsigned char>> objects_;
    std::map<Kind, std::map<std::string, nlohmann::json>> documents_;
};

// Filesystem store: objects under a two-level digest-prefix tree, documents
// as JSON files per namespace.
class FsLineageStore : public LineageStore {
public:
    explicit FsLineageStore(std::filesystem::path root);

    std::string put_object(std::span<const unsigned char> payload) override;
    std::optional<std::vector<unsigned char>> get_object(const std::string& digest) const override;
    bool contains_object(const std::string& digest) const override;
    void put_document(Kind kind, const std::string& key, const nlohmann::json& doc) override;
    std::optional<nlohmann::json> get_document(Kind kind, const std::string& key) const override;
    std::vector<std::string> list_documents(Kind kind) const override;

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path object_path(const std::string& digest) const;

private:
    std::filesystem::path document_dir(Kind kind) const;
    std::filesystem::path root_;
};

// --- Operations ---

// Content-addresses the payload and persists the record. Idempotent:
// identical bytes always map to the same digest.
DatumRecord register_datum(LineageStore& store, std::span<const unsigned char> payload,
                           const std::string& sequence_id,
                           const nlohmann::json& metadata = nlohmann::json::object());

LabelRecord register_label(LineageStore& store, std::span<const unsigned char> payload,
                           const std::string& target_datum, const std::string& schema);

std::vector<DatumRecord> all_datum_records(const LineageStore& store);
std::optional<DatumRecord> find_datum(const LineageStore& store, const std::string& digest);

// Persists the manifest under its content digest and returns that digest.
std::string put_manifest(LineageStore& store, const DatasetManifest& manifest);
std::optional<DatasetManifest> find_manifest(const LineageStore& store, const std::string& digest);

struct IntegrityReport {
    std::vector<std::string> missing;
    std::vector<std::string> corrupted;
    bool ok() const { return missing.empty() && corrupted.empty(); }
};

// Recomputes the digest of every payload listed by the manifest.
IntegrityReport verify_integrity(const DatasetManifest& manifest, const LineageStore& store);

// Splits records into development and certification manifests at sequence
// granularity; no sequence ever straddles the two. Greedy largest-first
// packing brings the realized fraction as close to `dev_fraction` as the
// sequence sizes permit. Deterministic for a given seed.
std::pair<DatasetManifest, DatasetManifest> sequence_split(
    const std::vector<DatumRecord>& records, double dev_fraction, std::uint64_t seed,
    const std::string& name_prefix = "split");

struct FirewallReport {
    std::vector<std::string> shared_digests;
    std::vector<std::string> shared_sequences;
    bool passed() const { return shared_digests.empty() && shared_sequences.empty(); }
};

// The certification firewall: training and certification sets must share
// neither datum digests nor landing-sequence ids.
FirewallReport firewall_check(const std::vector<DatasetManifest>& training,
                              const DatasetManifest& certification, const LineageStore& store);

// Applies a change order, producing the next manifest version with a parent
// link. Removing or modifying an absent digest raises ConflictError.
DatasetManifest apply_change_order(const ChangeOrder& order, const DatasetManifest& manifest,
                                   const LineageStore& store);

struct ChecklistReport {
    std::vector<std::string> passes;
    std::vector<std::string> warnings;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

// Confirms the artifacts needed to re-instantiate the model: architecture,
// hyperparameters, final weights (with integrity). Missing optional
// artifacts (init weights, seeds, logs, environment) are warnings. Any
// referenced manifest with certification role is a hard failure.
ChecklistReport verify_reproducibility_artifacts(const TrainingRunRecord& run,
                                                 const LineageStore& store);

} // namespace mlcert
