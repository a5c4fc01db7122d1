#include "torapp/error.hpp"
#include "torapp/pcap.hpp"
#include "torapp/synth.hpp"
#include "torapp/text.hpp"

#include <array>
#include <cstdio>
#include <fstream>

namespace torapp {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return std::uint64_t(out[0]) << 32 | out[1];
}

CorpusManifest build_labeled_corpus(std::span<const ArchetypeSpec> specs, std::size_t sessions_per_class,
                                    double duration_s, const PaddingConfig& padding, std::uint64_t seed,
                                    const std::filesystem::path& out_dir) {
    if (specs.empty()) throw PreconditionError("corpus needs at least one archetype");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        specs[i].validate();
        for (std::size_t j = 0; j < i; ++j)
            if (specs[j].name == specs[i].name)
                throw PreconditionError("duplicate archetype name '" + specs[i].name + "'");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw IoError("cannot create corpus directory '" + out_dir.string() + "'");

    CorpusManifest manifest{out_dir, {}};
    for (std::size_t c = 0; c < specs.size(); ++c) {
        for (std::size_t s = 0; s < sessions_per_class; ++s) {
            const auto session_seed = derive_seed(seed, c, s);
            auto session = generate_app_trace(specs[c], duration_s, session_seed);
            Rng padding_rng(derive_seed(session_seed, 0x70616464));
            session = inject_padding(session, padding, padding_rng);

            char name[64];
            std::snprintf(name, sizeof name, "_%04zu.pcap", s);
            const std::string filename = specs[c].name + name;
            write_pcap(session.packets, out_dir / filename);
            manifest.entries.push_back({filename, specs[c].name, padding.mode, session_seed});
        }
    }
    write_manifest(manifest, out_dir / kManifestFile);

    std::ofstream meta(out_dir / kCorpusMetaFile, std::ios::trunc);
    if (!meta) throw IoError("cannot create '" + (out_dir / kCorpusMetaFile).string() + "'");
    meta << "format=torapp-corpus 1\n"
         << "corpus_seed=" << seed << '\n'
         << "sessions_per_class=" << sessions_per_class << '\n'
         << "duration_s=" << text::format_double(duration_s) << '\n'
         << "padding_mode=" << padding_mode_id(padding.mode) << '\n'
         << "padding_cell_size=" << padding.padding_cell_size << '\n'
         << "full_range_s=" << text::format_double(padding.full_range.lo_s) << ','
         << text::format_double(padding.full_range.hi_s) << '\n'
         << "reduced_range_s=" << text::format_double(padding.reduced_range.lo_s) << ','
         << text::format_double(padding.reduced_range.hi_s) << '\n'
         << "padding_timeout_distribution=uniform\n";
    meta << "classes=";
    for (std::size_t c = 0; c < specs.size(); ++c) meta << (c ? "," : "") << specs[c].name;
    meta << '\n';
    if (!meta.flush()) throw IoError("error writing corpus metadata");
    return manifest;
}

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create manifest '" + path.string() + "'");
    out << "filename,label,padding_mode,seed\n";
    for (const auto& e : manifest.entries)
        out << e.filename << ',' << e.label << ',' << padding_mode_id(e.padding) << ',' << e.seed << '\n';
    if (!out.flush()) throw IoError("error writing manifest '" + path.string() + "'");
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
    const auto file = std::filesystem::is_directory(path) ? path / kManifestFile : path;
    std::ifstream in(file);
    if (!in) throw IoError("cannot open manifest '" + file.string() + "'");

    CorpusManifest m;
    m.directory = file.parent_path();
    std::string line;
    if (!std::getline(in, line)) throw ParseError("manifest '" + file.string() + "' is empty");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 4)
            throw ParseError("manifest line " + std::to_string(line_no) + ": expected 4 fields");
        ManifestEntry e;
        e.filename = std::string(f[0]);
        e.label = std::string(f[1]);
        e.padding = parse_padding_mode(f[2]);
        e.seed = text::parse_uint(f[3]);
        m.entries.push_back(std::move(e));
    }
    return m;
}

} // namespace torapp
