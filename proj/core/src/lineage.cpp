#include "mlcert/lineage.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "mlcert/digest.hpp"
#include "mlcert/error.hpp"
#include "mlcert/rng.hpp"

namespace mlcert {

namespace {

const char* document_namespace(LineageStore::Kind kind) {
    switch (kind) {
    case LineageStore::Kind::kDatum:
        return "records";
    case LineageStore::Kind::kLabel:
        return "labels";
    case LineageStore::Kind::kManifest:
        return "manifests";
    case LineageStore::Kind::kOrder:
        return "orders";
    case LineageStore::Kind::kRun:
        return "runs";
    }
    return "documents";
}

std::vector<std::string> deduplicated(std::vector<std::string> digests) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (auto& d : digests) {
        if (seen.insert(d).second) {
            out.push_back(std::move(d));
        }
    }
    return out;
}

} // namespace

nlohmann::json DatumRecord::to_json() const {
    return {{"digest", digest},
            {"locator", locator},
            {"sequence_id", sequence_id},
            {"metadata", metadata}};
}

DatumRecord DatumRecord::from_json(const nlohmann::json& j) {
    DatumRecord r;
    r.digest = j.at("digest").get<std::string>();
    r.locator = j.at("locator").get<std::string>();
    r.sequence_id = j.at("sequence_id").get<std::string>();
    r.metadata = j.value("metadata", nlohmann::json::object());
    return r;
}

nlohmann::json LabelRecord::to_json() const {
    return {{"digest", digest}, {"target_datum", target_datum}, {"schema", schema}};
}

LabelRecord LabelRecord::from_json(const nlohmann::json& j) {
    LabelRecord r;
    r.digest = j.at("digest").get<std::string>();
    r.target_datum = j.at("target_datum").get<std::string>();
    r.schema = j.at("schema").get<std::string>();
    return r;
}

std::string to_string(DatasetRole role) {
    switch (role) {
    case DatasetRole::kTraining:
        return "training";
    case DatasetRole::kValidation:
        return "validation";
    case DatasetRole::kCertification:
        return "certification";
    }
    return "training";
}

DatasetRole dataset_role_from_string(const std::string& s) {
    if (s == "training") {
        return DatasetRole::kTraining;
    }
    if (s == "validation") {
        return DatasetRole::kValidation;
    }
    if (s == "certification") {
        return DatasetRole::kCertification;
    }
    throw SchemaError("unknown dataset role '" + s + "'");
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json j{{"name", name},
                     {"version", version},
                     {"role", to_string(role)},
                     {"datum_digests", datum_digests},
                     {"label_digests", label_digests},
                     {"source_tags", source_tags},
                     {"last_order_id", last_order_id}};
    if (parent) {
        j["parent"] = *parent;
    }
    return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.version = j.at("version").get<std::uint64_t>();
    m.role = dataset_role_from_string(j.at("role").get<std::string>());
    m.datum_digests = j.at("datum_digests").get<std::vector<std::string>>();
    m.label_digests = j.value("label_digests", std::vector<std::string>{});
    if (j.contains("parent")) {
        m.parent = j["parent"].get<std::string>();
    }
    m.source_tags = j.value("source_tags", std::map<std::string, std::string>{});
    m.last_order_id = j.value("last_order_id", std::uint64_t{0});
    return m;
}

std::string DatasetManifest::canonical_serialization() const {
    // nlohmann::json objects keep keys sorted, so a compact dump is already
    // canonical.
    return to_json().dump();
}

std::string DatasetManifest::digest() const {
    return sha256_hex(canonical_serialization());
}

nlohmann::json ChangeOrder::to_json() const {
    nlohmann::json mods = nlohmann::json::array();
    for (const auto& [from, to] : modified) {
        mods.push_back({{"from", from}, {"to", to}});
    }
    return {{"id", id},        {"author", author},   {"timestamp", timestamp},
            {"added", added},  {"removed", removed}, {"modified", std::move(mods)},
            {"reason", reason}};
}

ChangeOrder ChangeOrder::from_json(const nlohmann::json& j) {
    ChangeOrder o;
    o.id = j.at("id").get<std::uint64_t>();
    o.author = j.value("author", std::string{});
    o.timestamp = j.value("timestamp", std::string{});
    o.added = j.value("added", std::vector<std::string>{});
    o.removed = j.value("removed", std::vector<std::string>{});
    if (j.contains("modified")) {
        for (const auto& m : j["modified"]) {
            o.modified.emplace_back(m.at("from").get<std::string>(),
                                    m.at("to").get<std::string>());
        }
    }
    o.reason = j.value("reason", std::string{});
    return o;
}

nlohmann::json TrainingRunRecord::to_json() const {
    nlohmann::json j{{"run_id", run_id},
                     {"architecture_id", architecture_id},
                     {"hyperparameters", hyperparameters},
                     {"final_weights_digest", final_weights_digest},
                     {"seeds", seeds},
                     {"training_manifests", training_manifest_digests},
                     {"validation_manifests", validation_manifest_digests}};
    if (init_weights_digest) {
        j["init_weights_digest"] = *init_weights_digest;
    }
    if (environment_digest) {
        j["environment_digest"] = *environment_digest;
    }
    if (logs_digest) {
        j["logs_digest"] = *logs_digest;
    }
    return j;
}

TrainingRunRecord TrainingRunRecord::from_json(const nlohmann::json& j) {
    TrainingRunRecord r;
    r.run_id = j.value("run_id", std::string{});
    r.architecture_id = j.value("architecture_id", std::string{});
    r.hyperparameters = j.value("hyperparameters", nlohmann::json::object());
    r.final_weights_digest = j.value("final_weights_digest", std::string{});
    r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    r.training_manifest_digests = j.value("training_manifests", std::vector<std::string>{});
    r.validation_manifest_digests = j.value("validation_manifests", std::vector<std::string>{});
    if (j.contains("init_weights_digest")) {
        r.init_weights_digest = j["init_weights_digest"].get<std::string>();
    }
    if (j.contains("environment_digest")) {
        r.environment_digest = j["environment_digest"].get<std::string>();
    }
    if (j.contains("logs_digest")) {
        r.logs_digest = j["logs_digest"].get<std::string>();
    }
    return r;
}

// --- MemoryLineageStore ---

std::string MemoryLineageStore::put_object(std::span<const unsigned char> payload) {
    std::string digest = sha256_hex(payload);
    objects_.try_emplace(digest, payload.begin(), payload.end());
    return digest;
}

std::optional<std::vector<unsigned char>> MemoryLineageStore::get_object(
    const std::string& digest) const {
    auto it = objects_.find(digest);
    if (it == objects_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool MemoryLineageStore::contains_object(const std::string& digest) const {
    return objects_.count(digest) > 0;
}

void MemoryLineageStore::put_document(Kind kind, const std::string& key,
                                      const nlohmann::json& doc) {
    documents_[kind][key] = doc;
}

std::optional<nlohmann::json> MemoryLineageStore::get_document(Kind kind,
                                                               const std::string& key) const {
    auto ns = documents_.find(kind);
    if (ns == documents_.end()) {
        return std::nullopt;
    }
    auto it = ns->second.find(key);
    if (it == ns->second.end()) {
        return std::nullopt;
    }
    return std::make_optional(it->second);
}

std::vector<std::string> MemoryLineageStore::list_documents(Kind kind) const {
    std::vector<std::string> keys;
    auto ns = documents_.find(kind);
    if (ns != documents_.end()) {
        for (const auto& [key, _] : ns->second) {
            keys.push_back(key);
        }
    }
    return keys;
}

void MemoryLineageStore::corrupt_object(const std::string& digest,
                                        std::vector<unsigned char> bytes) {
    objects_[digest] = std::move(bytes);
}

void MemoryLineageStore::drop_object(const std::string& digest) {
    objects_.erase(digest);
}

// --- FsLineageStore ---

FsLineageStore::FsLineageStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_ / "objects", ec);
    if (ec) {
        throw StorageError("cannot create store root '" + root_.string() + "': " + ec.message());
    }
}

std::filesystem::path FsLineageStore::object_path(const std::string& digest) const {
    if (!is_valid_digest(digest)) {
        throw StorageError("malformed digest '" + digest + "'");
    }
    return root_ / "objects" / digest.substr(0, 2) / digest.substr(2, 2) / digest;
}

std::filesystem::path FsLineageStore::document_dir(Kind kind) const {
    return root_ / document_namespace(kind);
}

std::string FsLineageStore::put_object(std::span<const unsigned char> payload) {
    std::string digest = sha256_hex(payload);
    const auto path = object_path(digest);
    if (std::filesystem::exists(path)) {
        return digest; // append-only: identical content already stored
    }
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
        throw StorageError("cannot create object directory: " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) {
        throw StorageError("failed writing object " + digest);
    }
    return digest;
}

std::optional<std::vector<unsigned char>> FsLineageStore::get_object(
    const std::string& digest) const {
    const auto path = object_path(digest);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

bool FsLineageStore::contains_object(const std::string& digest) const {
    return std::filesystem::exists(object_path(digest));
}

void FsLineageStore::put_document(Kind kind, const std::string& key, const nlohmann::json& doc) {
    const auto dir = document_dir(kind);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw StorageError("cannot create document directory: " + ec.message());
    }
    std::ofstream out(dir / (key + ".json"), std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) {
        throw StorageError("failed writing document " + key);
    }
}

std::optional<nlohmann::json> FsLineageStore::get_document(Kind kind,
                                                           const std::string& key) const {
    std::ifstream in(document_dir(kind) / (key + ".json"));
    if (!in) {
        return std::nullopt;
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw StorageError("document " + key + " is not valid JSON");
    }
    return j;
}

std::vector<std::string> FsLineageStore::list_documents(Kind kind) const {
    std::vector<std::string> keys;
    const auto dir = document_dir(kind);
    if (!std::filesystem::exists(dir)) {
        return keys;
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") {
            keys.push_back(entry.path().stem().string());
        }
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

// --- Operations ---

DatumRecord register_datum(LineageStore& store, std::span<const unsigned char> payload,
                           const std::string& sequence_id, const nlohmann::json& metadata) {
    if (payload.empty()) {
        throw SchemaError("datum payload must be non-empty");
    }
    DatumRecord record;
    record.digest = store.put_object(payload);
    record.locator = "objects/" + record.digest.substr(0, 2) + "/" + record.digest.substr(2, 2) +
                     "/" + record.digest;
    record.sequence_id = sequence_id;
    record.metadata = metadata;
    store.put_document(LineageStore::Kind::kDatum, record.digest, record.to_json());
    return record;
}

LabelRecord register_label(LineageStore& store, std::span<const unsigned char> payload,
                           const std::string& target_datum, const std::string& schema) {
    if (payload.empty()) {
        throw SchemaError("label payload must be non-empty");
    }
    if (!store.get_document(LineageStore::Kind::kDatum, target_datum)) {
        throw ConflictError("label targets unknown datum " + target_datum);
    }
    LabelRecord record;
    record.digest = store.put_object(payload);
    record.target_datum = target_datum;
    record.schema = schema;
    store.put_document(LineageStore::Kind::kLabel, record.digest, record.to_json());
    return record;
}

std::vector<DatumRecord> all_datum_records(const LineageStore& store) {
    std::vector<DatumRecord> records;
    for (const auto& key : store.list_documents(LineageStore::Kind::kDatum)) {
        if (auto doc = store.get_document(LineageStore::Kind::kDatum, key)) {
            records.push_back(DatumRecord::from_json(*doc));
        }
    }
    return records;
}

std::optional<DatumRecord> find_datum(const LineageStore& store, const std::string& digest) {
    if (auto doc = store.get_document(LineageStore::Kind::kDatum, digest)) {
        return DatumRecord::from_json(*doc);
    }
    return std::nullopt;
}

std::string put_manifest(LineageStore& store, const DatasetManifest& manifest) {
    const std::string digest = manifest.digest();
    store.put_document(LineageStore::Kind::kManifest, digest, manifest.to_json());
    return digest;
}

std::optional<DatasetManifest> find_manifest(const LineageStore& store,
                                             const std::string& digest) {
    if (auto doc = store.get_document(LineageStore::Kind::kManifest, digest)) {
        return DatasetManifest::from_json(*doc);
    }
    return std::nullopt;
}

IntegrityReport verify_integrity(const DatasetManifest& manifest, const LineageStore& store) {
    IntegrityReport report;
    auto check = [&](const std::string& digest) {
        const auto bytes = store.get_object(digest);
        if (!bytes) {
            report.missing.push_back(digest);
            return;
        }
        if (sha256_hex(std::span<const unsigned char>(bytes->data(), bytes->size())) != digest) {
            report.corrupted.push_back(digest);
        }
    };
    for (const auto& d : manifest.datum_digests) {
        check(d);
    }
    for (const auto& d : manifest.label_digests) {
        check(d);
    }
    return report;
}

std::pair<DatasetManifest, DatasetManifest> sequence_split(
    const std::vector<DatumRecord>& records, double dev_fraction, std::uint64_t seed,
    const std::string& name_prefix) {
    if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
        throw ConfigError("dev_fraction must lie strictly between 0 and 1");
    }
    std::map<std::string, std::vector<const DatumRecord*>> by_sequence;
    for (const auto& record : records) {
        by_sequence[record.sequence_id].push_back(&record);
    }
    if (by_sequence.size() < 2) {
        throw SplitError("cannot split at sequence granularity: fewer than two sequences");
    }

    struct Group {
        std::string sequence_id;
        std::vector<const DatumRecord*> members;
    };
    std::vector<Group> groups;
    groups.reserve(by_sequence.size());
    for (auto& [id, members] : by_sequence) {
        groups.push_back({id, std::move(members)});
    }
    // Seeded shuffle decides the order among equal-sized sequences; the
    // stable sort then puts the largest first.
    UniformSource rng(derive_seed(seed, 0));
    for (std::size_t i = groups.size(); i > 1; --i) {
        std::swap(groups[i - 1], groups[rng.next_index(i)]);
    }
    std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        return a.members.size() > b.members.size();
    });

    const double total = static_cast<double>(records.size());
    const double cert_target = (1.0 - dev_fraction) * total;
    std::vector<const Group*> dev_groups;
    std::vector<const Group*> cert_groups;
    double cert_count = 0.0;
    for (const Group& group : groups) {
        const double size = static_cast<double>(group.members.size());
        if (std::abs(cert_count + size - cert_target) < std::abs(cert_count - cert_target)) {
            cert_groups.push_back(&group);
            cert_count += size;
        } else {
            dev_groups.push_back(&group);
        }
    }
    // Both manifests must be non-empty; repair with the move that lands the
    // realized fraction closest to the target.
    auto repair = [&](std::vector<const Group*>& from, std::vector<const Group*>& to,
                      double sign) {
        std::size_t best = 0;
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < from.size(); ++i) {
            const double moved = cert_count + sign * static_cast<double>(from[i]->members.size());
            const double err = std::abs(moved - cert_target);
            if (err < best_err) {
                best_err = err;
                best = i;
            }
        }
        cert_count += sign * static_cast<double>(from[best]->members.size());
        to.push_back(from[best]);
        from.erase(from.begin() + static_cast<std::ptrdiff_t>(best));
    };
    if (cert_groups.empty()) {
        repair(dev_groups, cert_groups, +1.0);
    } else if (dev_groups.empty()) {
        repair(cert_groups, dev_groups, -1.0);
    }

    auto build = [&](const std::vector<const Group*>& side, const std::string& suffix,
                     DatasetRole role) {
        DatasetManifest m;
        m.name = name_prefix + suffix;
        m.version = 1;
        m.role = role;
        for (const Group* group : side) {
            for (const DatumRecord* record : group->members) {
                m.datum_digests.push_back(record->digest);
                const std::string source =
                    record->metadata.is_object() && record->metadata.contains("source")
                        ? record->metadata["source"].get<std::string>()
                        : "real";
                m.source_tags[record->digest] = source;
            }
        }
        m.datum_digests = deduplicated(std::move(m.datum_digests));
        return m;
    };
    return {build(dev_groups, "-development", DatasetRole::kTraining),
            build(cert_groups, "-certification", DatasetRole::kCertification)};
}

FirewallReport firewall_check(const std::vector<DatasetManifest>& training,
                              const DatasetManifest& certification, const LineageStore& store) {
    FirewallReport report;
    std::set<std::string> training_digests;
    std::set<std::string> training_sequences;
    for (const auto& manifest : training) {
        for (const auto& digest : manifest.datum_digests) {
            training_digests.insert(digest);
            if (auto record = find_datum(store, digest)) {
                training_sequences.insert(record->sequence_id);
            }
        }
    }
    std::set<std::string> shared_sequences;
    for (const auto& digest : certification.datum_digests) {
        if (training_digests.count(digest)) {
            report.shared_digests.push_back(digest);
        }
        if (auto record = find_datum(store, digest)) {
            if (training_sequences.count(record->sequence_id)) {
                shared_sequences.insert(record->sequence_id);
            }
        }
    }
    report.shared_sequences.assign(shared_sequences.begin(), shared_sequences.end());
    return report;
}

DatasetManifest apply_change_order(const ChangeOrder& order, const DatasetManifest& manifest,
                                   const LineageStore& store) {
    if (order.id <= manifest.last_order_id) {
        throw ConflictError("change order ids must be strictly increasing: " +
                            std::to_string(order.id) + " after " +
                            std::to_string(manifest.last_order_id));
    }
    enum class DigestKind { kDatum, kLabel };
    auto classify = [&](const std::string& digest) {
        if (store.get_document(LineageStore::Kind::kDatum, digest)) {
            return DigestKind::kDatum;
        }
        if (store.get_document(LineageStore::Kind::kLabel, digest)) {
            return DigestKind::kLabel;
        }
        throw ConflictError("change order references unknown digest " + digest);
    };

    DatasetManifest next = manifest;
    next.version = manifest.version + 1;
    next.parent = manifest.digest();
    next.last_order_id = order.id;

    auto remove_from = [](std::vector<std::string>& list, const std::string& digest) {
        auto it = std::find(list.begin(), list.end(), digest);
        if (it == list.end()) {
            return false;
        }
        list.erase(it);
        return true;
    };
    auto add_digest = [&](const std::string& digest) {
        switch (classify(digest)) {
        case DigestKind::kDatum:
            if (std::find(next.datum_digests.begin(), next.datum_digests.end(), digest) ==
                next.datum_digests.end()) {
                next.datum_digests.push_back(digest);
                if (auto record = find_datum(store, digest)) {
                    next.source_tags[digest] =
                        record->metadata.is_object() && record->metadata.contains("source")
                            ? record->metadata["source"].get<std::string>()
                            : "real";
                }
            }
            break;
        case DigestKind::kLabel:
            if (std::find(next.label_digests.begin(), next.label_digests.end(), digest) ==
                next.label_digests.end()) {
                next.label_digests.push_back(digest);
            }
            break;
        }
    };
    auto remove_digest = [&](const std::string& digest) {
        if (remove_from(next.datum_digests, digest)) {
            next.source_tags.erase(digest);
            return;
        }
        if (remove_from(next.label_digests, digest)) {
            return;
        }
        throw ConflictError("change order removes digest not present in manifest: " + digest);
    };

    for (const auto& digest : order.removed) {
        remove_digest(digest);
    }
    for (const auto& digest : order.added) {
        classify(digest); // referenced digests must exist at application time
        add_digest(digest);
    }
    for (const auto& [from, to] : order.modified) {
        remove_digest(from);
        classify(to);
        add_digest(to);
    }
    return next;
}

ChecklistReport verify_reproducibility_artifacts(const TrainingRunRecord& run,
                                                 const LineageStore& store) {
    ChecklistReport report;
    auto integrity_ok = [&](const std::string& digest) {
        const auto bytes = store.get_object(digest);
        if (!bytes) {
            return false;
        }
        return sha256_hex(std::span<const unsigned char>(bytes->data(), bytes->size())) == digest;
    };

    if (run.architecture_id.empty()) {
        report.failures.push_back("architecture id missing");
    } else {
        report.passes.push_back("architecture id present");
    }

    if (!run.hyperparameters.is_object()) {
        report.failures.push_back("hyperparameters missing");
    } else {
        report.passes.push_back("hyperparameters present");
    }

    if (run.final_weights_digest.empty()) {
        report.failures.push_back("final weights digest missing");
    } else if (!integrity_ok(run.final_weights_digest)) {
        report.failures.push_back("final weights payload missing or corrupted: " +
                                  run.final_weights_digest);
    } else {
        report.passes.push_back("final weights present and intact");
    }

    if (!run.init_weights_digest) {
        report.warnings.push_back("initialization weights not recorded");
    } else if (!integrity_ok(*run.init_weights_digest)) {
        report.failures.push_back("initialization weights payload missing or corrupted");
    } else {
        report.passes.push_back("initialization weights present and intact");
    }

    if (run.seeds.empty()) {
        report.warnings.push_back("rng seeds not recorded");
    } else {
        report.passes.push_back("rng seeds recorded");
    }

    if (!run.environment_digest) {
        report.warnings.push_back("environment description not recorded");
    } else if (!integrity_ok(*run.environment_digest)) {
        report.failures.push_back("environment description payload missing or corrupted");
    } else {
        report.passes.push_back("environment description present and intact");
    }

    if (!run.logs_digest) {
        report.warnings.push_back("training logs not recorded");
    } else if (!integrity_ok(*run.logs_digest)) {
        report.failures.push_back("training logs payload missing or corrupted");
    } else {
        report.passes.push_back("training logs present and intact");
    }

    auto check_manifests = [&](const std::vector<std::string>& digests, const char* what) {
        for (const auto& digest : digests) {
            const auto manifest = find_manifest(store, digest);
            if (!manifest) {
                report.failures.push_back(std::string(what) + " manifest unresolvable: " + digest);
                continue;
            }
            if (manifest->role == DatasetRole::kCertification) {
                report.failures.push_back(std::string(what) +
                                          " manifest breaches the certification firewall: " +
                                          digest);
            } else {
                report.passes.push_back(std::string(what) + " manifest resolvable: " + digest);
            }
        }
    };
    check_manifests(run.training_manifest_digests, "training");
    check_manifests(run.validation_manifest_digests, "validation");
    return report;
}

} // namespace mlcert
