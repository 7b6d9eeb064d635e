#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtconv/mtconv.hpp"
#include "published.hpp"

#ifndef MTCONV_VERSION
#define MTCONV_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mtconv;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_io = 1;
constexpr int exit_usage = 2;
constexpr int exit_relation_fails = 3;

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool quiet = false;
std::mutex log_mutex;

void note(const std::string& line) {
    if (quiet) return;
    std::lock_guard lock(log_mutex);
    std::cerr << line << '\n';
}

unsigned thread_count() {
    const char* env = std::getenv("MTCONV_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) return 1;
    return static_cast<unsigned>(n);
}

/// Runs the jobs on MTCONV_THREADS workers; results keep job order.
template <class R>
std::vector<R> run_jobs(const std::vector<std::function<R()>>& jobs) {
    std::vector<R> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= jobs.size()) return;
            try {
                results[i] = jobs[i]();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(thread_count(), jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw io_error(path.string() + ": " + e.what());
    }
}

/// Where a run's outputs go: a directory (plus manifest) or standard output.
struct run_context {
    std::vector<std::string> argv;
    std::optional<fs::path> out_dir;
    json config = json::object();
    std::vector<std::uint32_t> seeds;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void emit(const std::string& name, const std::string& content) {
        if (!out_dir) {
            std::cout << content;
            if (!content.empty() && content.back() != '\n') std::cout << '\n';
            return;
        }
        write_atomic(*out_dir / name, content);
        outputs.push_back((*out_dir / name).string());
    }

    void prepare_dir() {
        if (!out_dir) return;
        std::error_code ec;
        fs::create_directories(*out_dir, ec);
        if (ec) throw io_error("cannot create " + out_dir->string() + ": " + ec.message());
    }

    void write_manifest(const fs::path& path) const {
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json m = {{"tool", "mtconv"},       {"version", MTCONV_VERSION}, {"command", argv},
                  {"config", config},       {"seeds", seeds},            {"duration_seconds", seconds},
                  {"outputs", outputs}};
        write_atomic(path, m.dump(2) + "\n");
    }

    void finish() const {
        if (out_dir) write_manifest(*out_dir / "manifest.json");
    }
};

conversion conversion_from(const std::string& name) {
    const auto c = parse_conversion(name);
    if (!c) throw usage_error("unknown conversion '" + name + "'");
    return *c;
}

std::optional<lag_set> lags_from(const std::string& text) {
    if (text.empty()) return std::nullopt;
    try {
        return lag_set::parse(text);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
}

std::vector<std::uint32_t> seed_list(std::uint32_t first, std::uint32_t count) {
    std::vector<std::uint32_t> s;
    for (std::uint32_t i = 0; i < count; ++i) s.push_back(first + i);
    return s;
}

std::vector<std::string> conversion_names() {
    std::vector<std::string> names;
    for (auto c : all_conversions) names.emplace_back(to_string(c));
    return names;
}

// ---------------------------------------------------------------------------
// JSON views.

json to_json(const equidist_report& r) {
    json entries = json::array();
    for (const auto& e : r.entries) entries.push_back({{"v", e.v}, {"k", e.k}, {"d", e.defect}, {"bound", e.bound}});
    return {{"label", r.label}, {"p", r.p}, {"delta", r.delta}, {"entries", entries}};
}

json relation_json(const linear_relation& rel) {
    return {{"stream", rel.stream()}, {"weight", rel.weight()}, {"terms", mtconv::to_json(rel)}};
}

json log10_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json test_record(const test_result& r, conversion conv, const std::optional<lag_set>& lags, std::uint32_t seed) {
    const test_config& c = r.config;
    json params = {{"N", c.replications}, {"n", c.n}, {"tau", c.tau}};
    if (c.kind == test_kind::birthday || c.kind == test_kind::overlap_collision) {
        params["d"] = c.d;
        params["t"] = c.t;
    } else {
        params["L"] = c.L;
        params["sigma"] = c.sigma;
    }
    return {{"test", to_string(c.kind)},
            {"preset", c.name},
            {"conversion", to_string(conv)},
            {"lags", lags ? lags->to_string() : ""},
            {"params", params},
            {"seed", seed},
            {"statistic", r.statistic},
            {"expected", r.expected},
            {"dof", r.dof},
            {"p_value", r.p.value()},
            {"p_text", r.p.to_string()},
            {"log10_p", log10_json(r.p.log10_p)},
            {"log10_p_left", log10_json(r.p_left.log10_p)}};
}

json run_mt_test(const test_config& cfg, conversion conv, const std::optional<lag_set>& lags, std::uint32_t seed) {
    const std::string tag = fmt::format("[{} {} seed {}]", cfg.name.empty() ? std::string(to_string(cfg.kind)) : cfg.name,
                                        to_string(conv), seed);
    note(tag + " start");
    sample_stream stream(mt19937(seed), stream_config{conv, lags, 0});
    const auto t0 = std::chrono::steady_clock::now();
    const test_result r = run_test(cfg, stream, [&](std::uint64_t done, std::uint64_t total) {
        if (cfg.replications > 1 || done == total) note(fmt::format("{} {}/{}", tag, done, total));
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note(fmt::format("{} p = {} ({:.1f} s)", tag, r.p.to_string(), secs));
    return test_record(r, conv, lags, seed);
}

// ---------------------------------------------------------------------------
// generate

struct generate_options {
    std::string conversion = "raw32";
    std::uint32_t seed = 5489;
    std::uint64_t count = 0;
    std::string format = "dec";
    std::string lags;
    unsigned tau = 0;
    std::string out;
};

std::string format_sample(const real_sample& s, conversion conv, const std::string& format) {
    if (format == "hex") return fmt::format("{:0{}x}", s.bits, (s.width + 3) / 4);
    if (format == "real" || (format == "dec" && conv == conversion::res53))
        return s.width <= 53 ? fmt::format("{}", static_cast<double>(s.value())) : fmt::format("{:.20g}", s.value());
    return fmt::format("{}", s.bits);
}

int cmd_generate(const generate_options& o, run_context& ctx) {
    const conversion conv = conversion_from(o.conversion);
    const auto lags = lags_from(o.lags);
    if (o.tau >= output_width(conv)) throw usage_error("--tau must be below the output width");
    sample_stream stream(mt19937(o.seed), stream_config{conv, lags, o.tau});
    ctx.seeds = {o.seed};
    ctx.config = {{"conversion", o.conversion}, {"seed", o.seed}, {"count", o.count},
                  {"format", o.format},         {"lags", o.lags}, {"tau", o.tau}};

    std::ofstream file;
    fs::path tmp;
    if (!o.out.empty() && o.out != "-") {
        tmp = o.out + ".tmp";
        file.open(tmp, std::ios::binary);
        if (!file) throw io_error("cannot open " + tmp.string() + " for writing");
    }
    std::ostream& out = file.is_open() ? file : std::cout;
    const unsigned bytes = output_width(conv) <= 32 ? 4 : 8;
    std::string buf;
    for (std::uint64_t i = 0; i < o.count; ++i) {
        const real_sample s = stream.next();
        if (o.format == "raw") {
            for (unsigned b = 0; b < bytes; ++b) buf.push_back(static_cast<char>((s.bits >> (8 * b)) & 0xff));
        } else {
            buf += format_sample(s, conv, o.format);
            buf += '\n';
        }
        if (buf.size() > (1u << 16)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw io_error("write failed");
    if (file.is_open()) {
        file.close();
        std::error_code ec;
        fs::rename(tmp, o.out, ec);
        if (ec) throw io_error("cannot rename " + tmp.string() + ": " + ec.message());
        ctx.outputs.push_back(o.out);
        ctx.write_manifest(o.out + ".manifest.json");
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// equidist

struct equidist_options {
    std::string conversion = "raw32";
    unsigned vmax = 0;
    std::string format = "csv";
};

int cmd_equidist(const equidist_options& o, run_context& ctx) {
    const conversion conv = conversion_from(o.conversion);
    unsigned vmax = o.vmax;
    if (vmax == 0) vmax = conv == conversion::res53 ? 52 : output_width(conv);
    if (vmax > output_width(conv)) throw usage_error("--vmax exceeds the output width");
    ctx.config = {{"conversion", o.conversion}, {"vmax", vmax}, {"format", o.format}};
    ctx.prepare_dir();
    const auto report = kv_table(conv, vmax, [&](const equidist_entry& e) {
        note(fmt::format("[equidist {}] v={} k={} d={}", o.conversion, e.v, e.k, e.defect));
    });
    note(fmt::format("[equidist {}] delta={}", o.conversion, report.delta));
    if (o.format == "json")
        ctx.emit("equidist_" + o.conversion + ".json", to_json(report).dump(2) + "\n");
    else
        ctx.emit("equidist_" + o.conversion + ".csv", report.to_csv());
    ctx.finish();
    return exit_ok;
}

// ---------------------------------------------------------------------------
// relations

struct verify_options {
    std::string file;
    std::string conversion;
    std::uint64_t n = 1000000;
    std::uint32_t seeds = 1;
    std::uint32_t first_seed = 1;
};

linear_relation load_relation(const std::string& file) {
    const json j = parse_json_file(file);
    try {
        return relation_from_json(j);
    } catch (const std::exception& e) {
        throw usage_error(file + ": " + e.what());
    }
}

int cmd_verify(const verify_options& o, run_context& ctx) {
    const linear_relation rel = load_relation(o.file);
    const std::string conv_name = o.conversion.empty() ? rel.stream() : o.conversion;
    const conversion conv = conversion_from(conv_name);
    if (rel.max_bit() >= output_width(conv)) throw usage_error("relation bit outside the stream width");
    ctx.seeds = seed_list(o.first_seed, o.seeds);
    ctx.config = {{"file", o.file}, {"conversion", conv_name}, {"n", o.n}};
    ctx.prepare_dir();

    std::vector<std::function<json()>> jobs;
    for (auto seed : ctx.seeds)
        jobs.emplace_back([&, seed] {
            const auto r = verify(rel, conv, o.n, seed);
            note(fmt::format("[verify seed {}] {}", seed, r.holds() ? "holds" : "fails"));
            json j = {{"seed", seed}, {"holds", r.holds()}, {"checked", r.checked}};
            j["first_failure"] = r.first_failure ? json(*r.first_failure) : json(nullptr);
            return j;
        });
    const auto results = run_jobs(jobs);
    bool all = true;
    for (const auto& r : results) all = all && r.at("holds").get<bool>();
    const json out = {{"relation", relation_json(rel)}, {"conversion", conv_name}, {"n", o.n},
                      {"holds", all},                   {"results", results}};
    ctx.emit("verify.json", out.dump(2) + "\n");
    ctx.finish();
    return all ? exit_ok : exit_relation_fails;
}

struct discover_cli_options {
    unsigned v = 0;
    std::size_t k = 0;
    std::string window;
    std::string conversion = "raw32";
    std::size_t limit = 0;
    std::size_t max_kernel_dim = 20;
};

int cmd_discover(const discover_cli_options& o, run_context& ctx) {
    const conversion conv = conversion_from(o.conversion);
    const output_layout layout = make_layout(conv);
    bit_window window{0, o.v};
    if (!o.window.empty()) {
        const auto colon = o.window.find(':');
        if (colon == std::string::npos) throw usage_error("--window must be first:end");
        try {
            const unsigned a = static_cast<unsigned>(std::stoul(o.window.substr(0, colon)));
            const unsigned b = static_cast<unsigned>(std::stoul(o.window.substr(colon + 1)));
            if (b <= a) throw usage_error("--window end must exceed its start");
            window = {a, b - a};
        } catch (const std::logic_error&) {
            throw usage_error("--window must be first:end");
        }
        if (o.v != 0 && o.v != window.width) throw usage_error("--v disagrees with the --window width");
    }
    if (window.width == 0) throw usage_error("give --v or --window");
    if (window.first + window.width > layout.width()) throw usage_error("--window outside the output width");
    ctx.config = {{"conversion", o.conversion}, {"window", {window.first, window.first + window.width}},
                  {"k", o.k},                   {"limit", o.limit},
                  {"max_kernel_dim", o.max_kernel_dim}};
    ctx.prepare_dir();
    discover_options opt{o.max_kernel_dim, std::nullopt};
    if (o.limit) opt.max_results = o.limit;
    note(fmt::format("[discover] {} bits {}..{} of {} values", o.conversion, window.first,
                     window.first + window.width - 1, o.k));
    std::vector<linear_relation> rels;
    try {
        rels = discover(mt19937_params, layout, window, o.k, opt, o.conversion);
    } catch (const std::length_error& e) {
        throw usage_error(e.what());
    }
    json arr = json::array();
    for (const auto& r : rels) arr.push_back(relation_json(r));
    const json out = {{"conversion", o.conversion},
                      {"window", {window.first, window.first + window.width}},
                      {"k", o.k},
                      {"relations", arr}};
    ctx.emit("discover.json", out.dump(2) + "\n");
    ctx.finish();
    return exit_ok;
}

struct fold_options {
    std::string file;
    std::string conversion = "concat64-lo";
    unsigned phase = 0;
};

int cmd_fold(const fold_options& o, run_context& ctx) {
    const linear_relation rel = load_relation(o.file);
    const conversion conv = conversion_from(o.conversion);
    ctx.config = {{"file", o.file}, {"conversion", o.conversion}, {"phase", o.phase}};
    ctx.prepare_dir();
    linear_relation folded;
    try {
        folded = fold(rel, make_layout(conv), o.phase, o.conversion);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    ctx.emit("fold.json", relation_json(folded).dump(2) + "\n");
    ctx.finish();
    return exit_ok;
}

// ---------------------------------------------------------------------------
// test run

struct test_options {
    std::string battery;
    std::vector<std::string> presets;
    std::string conversion = "raw32";
    std::string lags;
    std::uint32_t seeds = 1;
    std::uint32_t first_seed = 1;
    std::uint64_t n = 0;
    std::uint64_t replications = 0;
};

int cmd_test(const test_options& o, run_context& ctx) {
    const conversion conv = conversion_from(o.conversion);
    const auto lags = lags_from(o.lags);
    std::vector<test_config> configs;
    if (o.battery == "paper") configs = presets::paper_battery();
    else if (!o.battery.empty()) throw usage_error("unknown battery '" + o.battery + "'");
    for (const auto& name : o.presets) {
        const auto cfg = presets::by_name(name);
        if (!cfg) throw usage_error("unknown preset '" + name + "'");
        configs.push_back(*cfg);
    }
    if (configs.empty()) throw usage_error("give --battery or --preset");
    for (auto& c : configs) {
        if (o.n) c.n = o.n;
        if (o.replications) c.replications = o.replications;
    }
    ctx.seeds = seed_list(o.first_seed, o.seeds);
    json names = json::array();
    for (const auto& c : configs) names.push_back(c.name);
    ctx.config = {{"tests", names},  {"conversion", o.conversion}, {"lags", o.lags},
                  {"n", o.n},        {"replications", o.replications}};
    ctx.prepare_dir();

    std::vector<std::function<json()>> jobs;
    for (const auto& c : configs)
        for (auto seed : ctx.seeds) jobs.emplace_back([&, c, seed] { return run_mt_test(c, conv, lags, seed); });
    json out = run_jobs(jobs);
    ctx.emit("tests_" + o.conversion + ".json", out.dump(2) + "\n");
    ctx.finish();
    return exit_ok;
}

// ---------------------------------------------------------------------------
// report

struct report_options {
    std::string table;
    std::uint32_t seeds = 5;
    std::uint32_t first_seed = 1;
    std::string from;
};

std::vector<json> load_json_dir(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw io_error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json" && entry.path().filename() != "manifest.json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<json> docs;
    for (const auto& f : files) docs.push_back(parse_json_file(f));
    if (docs.empty()) throw io_error("no run outputs in " + dir.string());
    return docs;
}

std::string table1_csv(const equidist_report& k64, const equidist_report& k32) {
    std::string csv = "v,k64,k32,k64_expected,k32_expected,expected_source\n";
    for (const auto& row : published::table1)
        csv += fmt::format("{},{},{},{},{},published\n", row.v, k64.at(row.v).k, k32.at(row.v).k, row.k64, row.k32);
    return csv;
}

int report_table1(const report_options& o, run_context& ctx) {
    std::optional<equidist_report> k64, k32;
    if (!o.from.empty()) {
        for (const auto& doc : load_json_dir(o.from)) {
            if (!doc.is_object() || !doc.contains("label") || !doc.contains("entries")) continue;
            equidist_report r{doc.at("label").get<std::string>(), doc.at("p").get<std::size_t>(), {},
                              doc.at("delta").get<std::size_t>()};
            for (const auto& e : doc.at("entries"))
                r.entries.push_back({e.at("v").get<unsigned>(), e.at("k").get<std::size_t>(),
                                     e.at("bound").get<std::size_t>(), e.at("d").get<std::size_t>()});
            if (r.label == "concat64-lo") k64 = r;
            if (r.label == "raw32") k32 = r;
        }
        if (!k64 || !k32 || k64->entries.size() < 32 || k32->entries.size() < 32)
            throw io_error("no complete concat64-lo and raw32 equidist JSON in " + o.from);
    } else {
        auto progress = [](const char* label) {
            return [label](const equidist_entry& e) { note(fmt::format("[table1 {}] v={} k={}", label, e.v, e.k)); };
        };
        k64 = kv_table(conversion::concat64_low_first, 32, progress("concat64-lo"));
        k32 = kv_table(conversion::raw32, 32, progress("raw32"));
    }
    ctx.emit("table1.csv", table1_csv(*k64, *k32));
    ctx.finish();
    return exit_ok;
}

int report_pvalues(const report_options& o, run_context& ctx, std::span<const published::p_row> rows) {
    const lag_set lags = lag_set::parse("0,396,623");
    const std::array<conversion, 2> convs{conversion::raw32, conversion::concat64_low_first};
    std::vector<std::string> presets_used;
    for (const auto& r : rows)
        if (std::find(presets_used.begin(), presets_used.end(), r.preset) == presets_used.end())
            presets_used.emplace_back(r.preset);

    std::vector<json> records;
    if (!o.from.empty()) {
        for (const auto& doc : load_json_dir(o.from)) {
            if (!doc.is_array()) continue;
            for (const auto& rec : doc)
                if (rec.is_object() && rec.contains("preset") && rec.value("lags", "") == lags.to_string())
                    records.push_back(rec);
        }
    } else {
        std::vector<std::function<json()>> jobs;
        for (const auto& name : presets_used)
            for (auto conv : convs)
                for (auto seed : ctx.seeds) {
                    const test_config cfg = *presets::by_name(name);
                    jobs.emplace_back([cfg, conv, seed, &lags] { return run_mt_test(cfg, conv, lags, seed); });
                }
        records = run_jobs(jobs);
        ctx.emit(o.table + "_records.json", json(records).dump(2) + "\n");
    }

    auto find = [&](const std::string& preset, conversion conv, std::uint32_t seed) -> const json* {
        for (const auto& r : records)
            if (r.value("preset", "") == preset && r.value("conversion", "") == to_string(conv) &&
                r.value("seed", 0u) == seed)
                return &r;
        return nullptr;
    };

    std::string csv = "row,preset,source";
    for (std::size_t i = 0; i < ctx.seeds.size(); ++i) csv += fmt::format(",seed{}", ctx.seeds[i]);
    csv += '\n';
    std::size_t found = 0;
    for (const auto& row : rows) {
        const conversion conv = row.label.find("(a)") != std::string_view::npos ? convs[0] : convs[1];
        csv += fmt::format("{},{},measured", row.label, row.preset);
        for (auto seed : ctx.seeds) {
            const json* r = find(std::string(row.preset), conv, seed);
            csv += ',';
            if (r) {
                csv += r->value("p_text", "");
                ++found;
            }
        }
        csv += '\n';
        csv += fmt::format("{},{},published", row.label, row.preset);
        for (std::size_t i = 0; i < ctx.seeds.size(); ++i) {
            csv += ',';
            if (i < row.p.size()) csv += row.p[i];
        }
        csv += '\n';
    }
    if (found == 0) throw io_error("no matching test records" + (o.from.empty() ? std::string() : " in " + o.from));
    ctx.emit(o.table + ".csv", csv);
    ctx.finish();
    return exit_ok;
}

int cmd_report(const report_options& o, run_context& ctx) {
    ctx.seeds = seed_list(o.first_seed, o.seeds);
    ctx.config = {{"table", o.table}, {"from", o.from}};
    ctx.prepare_dir();
    if (o.table == "table1") return report_table1(o, ctx);
    if (o.table == "table2") return report_pvalues(o, ctx, published::table2);
    if (o.table == "table3") return report_pvalues(o, ctx, published::table3);
    if (o.table == "table4") return report_pvalues(o, ctx, published::table4);
    if (o.table == "table5") return report_pvalues(o, ctx, published::table5);
    throw usage_error("unknown table '" + o.table + "'");
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path, const std::string& out) {
    const json m = parse_json_file(manifest_path);
    if (!m.contains("command") || !m.at("command").is_array()) throw io_error(manifest_path + ": no command");
    auto args = m.at("command").get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "replay") throw usage_error("a replay manifest cannot be replayed");
    if (!out.empty()) {
        bool replaced = false;
        for (std::size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--out") {
                args[i + 1] = out;
                replaced = true;
            }
        if (!replaced) {
            args.push_back("--out");
            args.push_back(out);
        }
    }
    return run(args);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"MT19937 output conversions: equidistribution, linear relations, statistical tests", "mtconv"};
    app.set_version_flag("--version", MTCONV_VERSION);
    app.require_subcommand(1);
    app.add_flag("-q,--quiet", quiet, "No progress on standard error");
    const auto conv_check = CLI::IsMember(conversion_names());

    run_context ctx;
    ctx.argv = args;
    std::string out;
    std::function<int()> action;

    generate_options gen;
    auto* g = app.add_subcommand("generate", "Print stream values");
    g->add_option("--conversion", gen.conversion, "raw32, concat64-lo, concat64-hi, res53, rev32")->check(conv_check);
    g->add_option("--seed", gen.seed, "32-bit seed")->capture_default_str();
    g->add_option("--count", gen.count, "Number of values")->required();
    g->add_option("--format", gen.format, "dec, hex, real or raw")
        ->check(CLI::IsMember({"dec", "hex", "real", "raw"}))
        ->capture_default_str();
    g->add_option("--lags", gen.lags, "Lag set, e.g. 0,396,623");
    g->add_option("--tau", gen.tau, "Leading bits to skip");
    g->add_option("--out", gen.out, "Output file (default: standard output)");
    g->callback([&] { action = [&] { return cmd_generate(gen, ctx); }; });

    equidist_options eq;
    auto* e = app.add_subcommand("equidist", "k(v), d(v) and the total defect of a conversion");
    e->add_option("--conversion", eq.conversion)->check(conv_check)->capture_default_str();
    e->add_option("--vmax", eq.vmax, "Largest v (default: output width, 52 for res53)");
    e->add_option("--format", eq.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    e->add_option("--out", out, "Output directory");
    e->callback([&] { action = [&] { return cmd_equidist(eq, ctx); }; });

    auto* rel = app.add_subcommand("relations", "Verify, discover or fold F2-linear relations");
    rel->require_subcommand(1);
    verify_options ver;
    auto* rv = rel->add_subcommand("verify", "Check a relation on generated streams");
    rv->add_option("--file", ver.file, "Relation JSON")->required();
    rv->add_option("--conversion", ver.conversion, "Stream (default: the relation's own)")->check(conv_check);
    rv->add_option("--n", ver.n, "Indices per seed")->capture_default_str();
    rv->add_option("--seeds", ver.seeds, "Number of seeds")->capture_default_str();
    rv->add_option("--first-seed", ver.first_seed)->capture_default_str();
    rv->add_option("--out", out, "Output directory");
    rv->callback([&] { action = [&] { return cmd_verify(ver, ctx); }; });

    discover_cli_options dis;
    auto* rd = rel->add_subcommand("discover", "All relations among a bit window of k successive values");
    rd->add_option("--v", dis.v, "Window width (MSB window 0:v unless --window is given)");
    rd->add_option("--k", dis.k, "Number of successive values")->required();
    rd->add_option("--window", dis.window, "Bits first:end, counted from the MSB");
    rd->add_option("--conversion", dis.conversion)->check(conv_check)->capture_default_str();
    rd->add_option("--limit", dis.limit, "Keep only the lowest-weight relations");
    rd->add_option("--max-kernel-dim", dis.max_kernel_dim)->capture_default_str();
    rd->add_option("--out", out, "Output directory");
    rd->callback([&] { action = [&] { return cmd_discover(dis, ctx); }; });

    fold_options fol;
    auto* rf = rel->add_subcommand("fold", "Re-address a raw32 relation onto a 64-bit conversion");
    rf->add_option("--file", fol.file, "Relation JSON")->required();
    rf->add_option("--conversion", fol.conversion)->check(conv_check)->capture_default_str();
    rf->add_option("--phase", fol.phase, "Position of index i inside its word pair")->capture_default_str();
    rf->add_option("--out", out, "Output directory");
    rf->callback([&] { action = [&] { return cmd_fold(fol, ctx); }; });

    auto* t = app.add_subcommand("test", "Statistical tests");
    t->require_subcommand(1);
    test_options tst;
    auto* tr = t->add_subcommand("run", "Run tests on MT19937 streams");
    tr->add_option("--battery", tst.battery, "paper: all five presets")->check(CLI::IsMember({"paper"}));
    tr->add_option("--preset", tst.presets, "smallcrush8, crush86, bigcrush5, bigcrush6, bigcrush14")
        ->check(CLI::IsMember(std::vector<std::string>(presets::names.begin(), presets::names.end())));
    tr->add_option("--conversion", tst.conversion)->check(conv_check)->capture_default_str();
    tr->add_option("--lags", tst.lags, "Lag set, e.g. 0,396,623");
    tr->add_option("--seeds", tst.seeds, "Number of seeds")->capture_default_str();
    tr->add_option("--first-seed", tst.first_seed)->capture_default_str();
    tr->add_option("--n", tst.n, "Override the sample size");
    tr->add_option("--replications", tst.replications, "Override N~ (Poisson tests)");
    tr->add_option("--out", out, "Output directory");
    tr->callback([&] { action = [&] { return cmd_test(tst, ctx); }; });

    report_options rep;
    auto* r = app.add_subcommand("report", "Tables in the published layout");
    r->add_option("table", rep.table, "table1 .. table5")
        ->required()
        ->check(CLI::IsMember({"table1", "table2", "table3", "table4", "table5"}));
    r->add_option("--seeds", rep.seeds, "Number of seeds")->capture_default_str();
    r->add_option("--first-seed", rep.first_seed)->capture_default_str();
    r->add_option("--from", rep.from, "Directory of earlier run outputs instead of a live run");
    r->add_option("--out", out, "Output directory");
    r->callback([&] { action = [&] { return cmd_report(rep, ctx); }; });

    std::string manifest;
    std::string replay_out;
    auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    rp->add_option("manifest", manifest, "manifest.json")->required();
    rp->add_option("--out", replay_out, "Write outputs here instead");
    rp->callback([&] { action = [&] { return cmd_replay(manifest, replay_out); }; });

    std::vector<std::string> argv_store{"mtconv"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForVersion& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n\n" << app.help();
        return exit_usage;
    }
    if (!out.empty()) ctx.out_dir = fs::path(out);

    try {
        return action();
    } catch (const usage_error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return exit_usage;
    } catch (const io_error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return exit_io;
    } catch (const fs::filesystem_error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return exit_io;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return exit_usage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return exit_io;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::locale::global(std::locale::classic());
    return run(std::vector<std::string>(argv + 1, argv + argc));
}
