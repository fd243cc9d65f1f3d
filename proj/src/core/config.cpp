#include "i3net/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "i3net/errors.hpp"

namespace i3net::cli {

using nlohmann::json;

RunConfig default_run_config() {
    RunConfig rc;
    // Desk profile; paper-scale values go through the same fields.
    rc.model.channels = 32;
    rc.model.n_blocks = 4;
    rc.model.cvb_positions = {2};
    rc.model.window = 16;
    rc.model.s_in = 4;
    rc.model.scale = 2;
    rc.model.variant = model::Variant::full;
    rc.model.global_residual = true;
    rc.train.epochs = 50;
    rc.train.batch_size = 4;
    rc.train.crop = 64;
    return rc;
}

bool deterministic_env_forced() {
    const char* env = std::getenv("I3NET_DETERMINISTIC");
    return env != nullptr && env[0] == '1';
}

namespace {

struct Problems {
    std::vector<std::string> items;
    void add(const std::string& s) { items.push_back(s); }
    void check_throw() const {
        if (items.empty()) return;
        std::string msg = "config: " + std::to_string(items.size()) + " problem(s):";
        for (const auto& s : items) msg += "\n  - " + s;
        throw ValidationError(msg);
    }
};

// Fetches j[key] as T, recording type mismatches instead of throwing.
template <typename T>
void get_field(const json& j, const char* section, const char* key, T& out, Problems& pr) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        pr.add(std::string(section) + "." + key + ": wrong type");
    }
}

void check_unknown(const json& j, const char* section, std::initializer_list<const char*> known,
                   Problems& pr) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) pr.add(std::string("unknown key ") + section + "." + it.key());
    }
}

} // namespace

RunConfig parse_config(const std::string& path, const Overrides& overrides) {
    RunConfig rc = default_run_config();
    Problems pr;

    if (!path.empty()) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open config: " + path);
        json j;
        try {
            // An empty file means "all defaults".
            std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
            bool blank = true;
            for (char c : text)
                if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
            j = blank ? json::object() : json::parse(text);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("config: invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ValidationError("config: top level must be an object");
        check_unknown(j, "", {"schema_version", "seed", "deterministic", "data", "model", "train"}, pr);
        get_field(j, "", "schema_version", rc.schema_version, pr);
        get_field(j, "", "seed", rc.seed, pr);
        get_field(j, "", "deterministic", rc.deterministic, pr);
        if (j.contains("data") && j["data"].is_object()) {
            const json& d = j["data"];
            check_unknown(d, "data",
                          {"train_dir", "val_dir", "scale", "s_in", "crop", "normalize_lo",
                           "normalize_hi"},
                          pr);
            get_field(d, "data", "train_dir", rc.data.train_dir, pr);
            get_field(d, "data", "val_dir", rc.data.val_dir, pr);
            get_field(d, "data", "scale", rc.data.scale, pr);
            get_field(d, "data", "s_in", rc.data.s_in, pr);
            get_field(d, "data", "crop", rc.data.crop, pr);
            get_field(d, "data", "normalize_lo", rc.data.normalize_lo, pr);
            get_field(d, "data", "normalize_hi", rc.data.normalize_hi, pr);
        } else if (j.contains("data")) {
            pr.add("data: must be an object");
        }
        if (j.contains("model") && j["model"].is_object()) {
            const json& m = j["model"];
            check_unknown(m, "model",
                          {"channels", "n_blocks", "cvb_positions", "window", "variant",
                           "global_residual", "token_expansion", "channel_expansion"},
                          pr);
            get_field(m, "model", "channels", rc.model.channels, pr);
            get_field(m, "model", "n_blocks", rc.model.n_blocks, pr);
            get_field(m, "model", "cvb_positions", rc.model.cvb_positions, pr);
            get_field(m, "model", "window", rc.model.window, pr);
            get_field(m, "model", "global_residual", rc.model.global_residual, pr);
            get_field(m, "model", "token_expansion", rc.model.token_expansion, pr);
            get_field(m, "model", "channel_expansion", rc.model.channel_expansion, pr);
            if (m.contains("variant")) {
                try {
                    rc.model.variant = model::variant_from_name(m["variant"].get<std::string>());
                } catch (const std::exception& e) {
                    pr.add(std::string("model.variant: ") + e.what());
                }
            }
        } else if (j.contains("model")) {
            pr.add("model: must be an object");
        }
        if (j.contains("train") && j["train"].is_object()) {
            const json& t = j["train"];
            check_unknown(t, "train",
                          {"epochs", "batch_size", "lr0", "beta1", "beta2", "adam_eps", "grad_clip",
                           "patches_per_volume", "checkpoint_interval", "val_interval", "workers"},
                          pr);
            get_field(t, "train", "epochs", rc.train.epochs, pr);
            get_field(t, "train", "batch_size", rc.train.batch_size, pr);
            get_field(t, "train", "lr0", rc.train.lr0, pr);
            get_field(t, "train", "beta1", rc.train.beta1, pr);
            get_field(t, "train", "beta2", rc.train.beta2, pr);
            get_field(t, "train", "adam_eps", rc.train.adam_eps, pr);
            get_field(t, "train", "grad_clip", rc.train.grad_clip, pr);
            get_field(t, "train", "patches_per_volume", rc.train.patches_per_volume, pr);
            get_field(t, "train", "checkpoint_interval", rc.train.checkpoint_interval, pr);
            get_field(t, "train", "val_interval", rc.train.val_interval, pr);
            get_field(t, "train", "workers", rc.train.workers, pr);
        } else if (j.contains("train")) {
            pr.add("train: must be an object");
        }
    }

    if (overrides.seed) rc.seed = *overrides.seed;
    if (overrides.deterministic) rc.deterministic = *overrides.deterministic;
    if (deterministic_env_forced()) rc.deterministic = true;

    // Keep the shared fields coherent.
    rc.model.scale = rc.data.scale;
    rc.model.s_in = rc.data.s_in;
    rc.train.seed = rc.seed;
    rc.train.deterministic = rc.deterministic;
    rc.train.crop = rc.data.crop;

    if (rc.schema_version != 1) pr.add("schema_version: only version 1 is supported");
    try {
        rc.model.validate();
    } catch (const std::exception& e) {
        pr.add(e.what());
    }
    try {
        rc.train.validate();
    } catch (const std::exception& e) {
        pr.add(e.what());
    }
    if (rc.data.scale < 1) pr.add("data.scale: must be >= 1");
    if (rc.data.s_in < 2) pr.add("data.s_in: must be >= 2");
    if (rc.data.crop < 2) pr.add("data.crop: must be >= 2");
    if (rc.data.crop % 16 != 0) pr.add("data.crop: must be divisible by 16 (window partition)");
    if (!(rc.data.normalize_lo < rc.data.normalize_hi))
        pr.add("data.normalize_lo must be < normalize_hi");
    if (rc.model.window > 0 && rc.data.crop % rc.model.window != 0)
        pr.add("data.crop: must be divisible by model.window");
    pr.check_throw();
    return rc;
}

std::string run_config_to_json(const RunConfig& rc) {
    json j;
    j["schema_version"] = rc.schema_version;
    j["seed"] = rc.seed;
    j["deterministic"] = rc.deterministic;
    j["data"] = {{"train_dir", rc.data.train_dir}, {"val_dir", rc.data.val_dir},
                 {"scale", rc.data.scale},         {"s_in", rc.data.s_in},
                 {"crop", rc.data.crop},           {"normalize_lo", rc.data.normalize_lo},
                 {"normalize_hi", rc.data.normalize_hi}};
    j["model"] = {{"channels", rc.model.channels},
                  {"n_blocks", rc.model.n_blocks},
                  {"cvb_positions", rc.model.cvb_positions},
                  {"window", rc.model.window},
                  {"variant", model::variant_name(rc.model.variant)},
                  {"global_residual", rc.model.global_residual},
                  {"token_expansion", rc.model.token_expansion},
                  {"channel_expansion", rc.model.channel_expansion}};
    j["train"] = {{"epochs", rc.train.epochs},
                  {"batch_size", rc.train.batch_size},
                  {"lr0", rc.train.lr0},
                  {"beta1", rc.train.beta1},
                  {"beta2", rc.train.beta2},
                  {"adam_eps", rc.train.adam_eps},
                  {"grad_clip", rc.train.grad_clip},
                  {"patches_per_volume", rc.train.patches_per_volume},
                  {"checkpoint_interval", rc.train.checkpoint_interval},
                  {"val_interval", rc.train.val_interval},
                  {"workers", rc.train.workers}};
    return j.dump();
}

std::string config_fingerprint(const RunConfig& rc) {
    const std::uint64_t h = fnv1a64(run_config_to_json(rc));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace i3net::cli
