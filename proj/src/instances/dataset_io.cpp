#include "pomo/instances/dataset_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "pomo/core/error.hpp"
#include "pomo/core/io.hpp"

namespace pomo {

namespace {

constexpr char kMagic[] = "POMODS1";
constexpr std::size_t kMagicLen = 7;

void write_instance(ByteWriter& w, const TspInstance& t) {
    w.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& c : t.nodes) {
        w.f64(c.x);
        w.f64(c.y);
    }
}

void write_instance(ByteWriter& w, const CvrpInstance& v) {
    w.u32(static_cast<std::uint32_t>(v.customers.size()));
    w.f64(v.vehicle_capacity);
    w.f64(v.depot.x);
    w.f64(v.depot.y);
    for (std::size_t i = 0; i < v.customers.size(); ++i) {
        w.f64(v.customers[i].x);
        w.f64(v.customers[i].y);
        w.f64(v.demands[i]);
    }
}

void write_instance(ByteWriter& w, const KpInstance& k) {
    w.u32(static_cast<std::uint32_t>(k.items.size()));
    w.f64(k.capacity);
    for (const auto& item : k.items) {
        w.f64(item.weight);
        w.f64(item.value);
    }
}

TspInstance read_tsp(ByteReader& r) {
    const std::uint32_t m = r.u32("tsp node count");
    TspInstance t;
    t.nodes.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) {
        const double x = r.f64("tsp x");
        const double y = r.f64("tsp y");
        t.nodes.push_back({x, y});
    }
    return t;
}

CvrpInstance read_cvrp(ByteReader& r) {
    const std::uint32_t m = r.u32("cvrp customer count");
    CvrpInstance v;
    v.vehicle_capacity = r.f64("cvrp capacity");
    v.depot.x = r.f64("cvrp depot x");
    v.depot.y = r.f64("cvrp depot y");
    v.customers.reserve(m);
    v.demands.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) {
        const double x = r.f64("cvrp x");
        const double y = r.f64("cvrp y");
        const double d = r.f64("cvrp demand");
        v.customers.push_back({x, y});
        v.demands.push_back(d);
    }
    return v;
}

KpInstance read_kp(ByteReader& r) {
    const std::uint32_t m = r.u32("kp item count");
    KpInstance k;
    k.capacity = r.f64("kp capacity");
    k.items.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) {
        const double w = r.f64("kp weight");
        const double v = r.f64("kp value");
        k.items.push_back({w, v});
    }
    return k;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    ByteWriter w;
    w.raw(kMagic, kMagicLen);
    w.u8(static_cast<std::uint8_t>(ds.kind));
    w.u64(ds.instances.size());
    w.u64(ds.seed);
    for (const auto& any : ds.instances) {
        std::visit([&](const auto& inst) { write_instance(w, inst); }, any);
    }
    write_file_bytes(path, w.bytes());
}

Dataset load_dataset(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    ByteReader r(bytes.data(), bytes.size());
    char magic[kMagicLen];
    r.read_raw(magic, kMagicLen, "magic");
    if (std::string_view(magic, kMagicLen) != kMagic)
        throw FormatError("dataset: bad magic (expected POMODS1)", 0);
    const std::uint8_t kind_byte = r.u8("kind");
    if (kind_byte > 2)
        throw FormatError("dataset: unknown problem kind byte " + std::to_string(kind_byte),
                          kMagicLen);
    const std::uint64_t count = r.u64("count");
    Dataset ds;
    ds.kind = static_cast<ProblemKind>(kind_byte);
    ds.seed = r.u64("seed");
    ds.instances.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        switch (ds.kind) {
            case ProblemKind::kTsp: ds.instances.emplace_back(read_tsp(r)); break;
            case ProblemKind::kCvrp: ds.instances.emplace_back(read_cvrp(r)); break;
            case ProblemKind::kKp: ds.instances.emplace_back(read_kp(r)); break;
        }
    }
    if (r.remaining() != 0)
        throw FormatError("dataset: " + std::to_string(r.remaining()) + " trailing bytes",
                          r.offset());
    return ds;
}

void save_dataset_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open for writing: " + path);
    nlohmann::ordered_json header;
    header["kind"] = to_string(ds.kind);
    header["count"] = ds.instances.size();
    header["seed"] = ds.seed;
    out << header.dump() << "\n";
    for (const auto& any : ds.instances) {
        nlohmann::ordered_json j;
        std::visit(
            [&](const auto& inst) {
                using T = std::decay_t<decltype(inst)>;
                if constexpr (std::is_same_v<T, TspInstance>) {
                    auto& nodes = j["nodes"];
                    nodes = nlohmann::ordered_json::array();
                    for (const auto& c : inst.nodes) nodes.push_back({c.x, c.y});
                } else if constexpr (std::is_same_v<T, CvrpInstance>) {
                    j["capacity"] = inst.vehicle_capacity;
                    j["depot"] = {inst.depot.x, inst.depot.y};
                    auto& customers = j["customers"];
                    customers = nlohmann::ordered_json::array();
                    for (const auto& c : inst.customers) customers.push_back({c.x, c.y});
                    j["demands"] = inst.demands;
                } else {
                    j["capacity"] = inst.capacity;
                    auto& items = j["items"];
                    items = nlohmann::ordered_json::array();
                    for (const auto& it : inst.items) items.push_back({it.weight, it.value});
                }
            },
            any);
        out << j.dump() << "\n";
    }
    if (!out) throw ArgumentError("write failed: " + path);
}

Dataset load_dataset_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("jsonl dataset: missing header line");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("jsonl dataset: bad header: ") + e.what());
    }
    Dataset ds;
    ds.kind = problem_kind_from_string(header.at("kind").get<std::string>());
    ds.seed = header.at("seed").get<std::uint64_t>();
    const std::uint64_t count = header.at("count").get<std::uint64_t>();
    ds.instances.reserve(count);
    std::uint64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("jsonl dataset: bad record on line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        switch (ds.kind) {
            case ProblemKind::kTsp: {
                TspInstance t;
                for (const auto& pair : j.at("nodes"))
                    t.nodes.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
                ds.instances.emplace_back(std::move(t));
                break;
            }
            case ProblemKind::kCvrp: {
                CvrpInstance v;
                v.vehicle_capacity = j.at("capacity").get<double>();
                v.depot = {j.at("depot").at(0).get<double>(), j.at("depot").at(1).get<double>()};
                for (const auto& pair : j.at("customers"))
                    v.customers.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
                v.demands = j.at("demands").get<std::vector<double>>();
                ds.instances.emplace_back(std::move(v));
                break;
            }
            case ProblemKind::kKp: {
                KpInstance k;
                k.capacity = j.at("capacity").get<double>();
                for (const auto& pair : j.at("items"))
                    k.items.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
                ds.instances.emplace_back(std::move(k));
                break;
            }
        }
    }
    if (ds.instances.size() != count)
        throw SchemaError("jsonl dataset: header count " + std::to_string(count) +
                          " does not match " + std::to_string(ds.instances.size()) + " records");
    return ds;
}

Dataset load_dataset_expect(const std::string& path, ProblemKind expected) {
    Dataset ds = load_dataset(path);
    if (ds.kind != expected)
        throw SchemaError("dataset " + path + " holds " + to_string(ds.kind) + " instances, " +
                          to_string(expected) + " required");
    return ds;
}

}  // namespace pomo
