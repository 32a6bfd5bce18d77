#include "datavideo/media.hpp"

#include <cmath>
#include <cstdint>

#include "datavideo/error.hpp"
#include "datavideo/hashing.hpp"
#include "datavideo/svg_binding.hpp"
#include "subprocess.hpp"

namespace datavideo {

using detail::run_command;
using detail::shell_quote;

namespace {

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos; pos += to.size()) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

std::string first_line(const std::string& text) {
    const auto t = trim(text);
    return std::string(t.substr(0, t.find('\n')));
}

}  // namespace

// ---------------------------------------------------------------------------
// Renderer

std::string CommandRenderer::render(const Json& spec) {
    const auto result = run_command(command_, spec.dump(), timeout_);
    if (result.timed_out) throw Error(Errc::renderer_crashed, "renderer timed out");
    if (result.exit_code >= 128) {
        throw Error(Errc::renderer_crashed, "exit code " + std::to_string(result.exit_code));
    }
    if (result.exit_code != 0) {
        throw Error(Errc::renderer_rejected_spec,
                    result.err.empty() ? "exit code " + std::to_string(result.exit_code) : std::string(trim(result.err)));
    }
    return result.out;
}

std::string render_visualization(const Json& spec, Renderer& renderer) {
    std::string svg = renderer.render(spec);
    const SvgDoc doc = parse_svg(svg);
    for (const auto& el : doc.elements()) {
        if (!el.has_class(mark_group_class)) continue;
        for (auto c : el.children) {
            if (!doc.at(c).attr("data-row")) {
                throw Error(Errc::metadata_missing, "mark element " + doc.at(c).id + " has no data-row attribute");
            }
        }
    }
    return svg;
}

// ---------------------------------------------------------------------------
// Text to speech

std::string silent_wav(double seconds, int sample_rate) {
    const auto samples = static_cast<std::uint32_t>(std::llround(std::max(0.0, seconds) * sample_rate));
    const std::uint32_t data_bytes = samples * 2;
    std::string out;
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
    };
    auto u16 = [&](std::uint16_t v) {
        out += static_cast<char>(v & 0xff);
        out += static_cast<char>(v >> 8);
    };
    out += "RIFF";
    u32(36 + data_bytes);
    out += "WAVEfmt ";
    u32(16);
    u16(1);  // PCM
    u16(1);  // mono
    u32(static_cast<std::uint32_t>(sample_rate));
    u32(static_cast<std::uint32_t>(sample_rate) * 2);
    u16(2);
    u16(16);
    out += "data";
    u32(data_bytes);
    out.append(data_bytes, '\0');
    return out;
}

Speech MockSpeechSynthesizer::synthesize(std::string_view narration, const std::filesystem::path& audio_path) {
    Speech speech;
    const auto words = tokenize_words(narration);
    // integer milliseconds keep every boundary an exact multiple of 0.3
    const auto step_ms = static_cast<long long>(std::llround(mock_seconds_per_word * 1000));
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto k = static_cast<long long>(i);
        speech.timings.push_back(WordTiming{words[i].first, static_cast<double>(k * step_ms) / 1000.0,
                                            static_cast<double>((k + 1) * step_ms) / 1000.0, words[i].second});
    }
    speech.duration = static_cast<double>(static_cast<long long>(words.size()) * step_ms) / 1000.0;
    speech.audio = audio_path;
    write_file_atomic(audio_path, silent_wav(speech.duration));
    return speech;
}

std::vector<WordTiming> estimate_word_timings(std::string_view narration, double duration) {
    const auto words = tokenize_words(narration);
    std::size_t total = 0;
    for (const auto& w : words) total += w.first.size();
    std::vector<WordTiming> out;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const double start = duration * static_cast<double>(seen) / static_cast<double>(total);
        seen += words[i].first.size();
        const double end = i + 1 == words.size() ? duration : duration * static_cast<double>(seen) / static_cast<double>(total);
        out.push_back(WordTiming{words[i].first, start, end, words[i].second});
    }
    return out;
}

Speech CommandSpeechSynthesizer::synthesize(std::string_view narration, const std::filesystem::path& audio_path) {
    const std::string command = replace_all(command_, "{audio}", shell_quote(audio_path.string()));
    const auto result = run_command(command, std::string(narration), timeout_);
    if (result.timed_out) throw Error(Errc::tts_failure, "text-to-speech command timed out");
    if (result.exit_code != 0) {
        throw Error(Errc::tts_failure, "exit code " + std::to_string(result.exit_code) + ": " + first_line(result.err));
    }
    if (!std::filesystem::exists(audio_path)) throw Error(Errc::tts_failure, "no audio file was written");

    Speech speech;
    speech.audio = audio_path;
    Json reply;
    try {
        reply = Json::parse(result.out);
    } catch (const Json::exception& e) {
        throw Error(Errc::tts_failure, std::string("unreadable timing output: ") + e.what());
    }
    const Json words = reply.contains("words") ? reply["words"] : Json::array();
    const auto tokens = tokenize_words(narration);
    if (!words.is_array() || words.empty()) {
        if (!reply.contains("duration") || !reply["duration"].is_number()) {
            throw Error(Errc::tts_failure, "neither word timings nor a duration were returned");
        }
        speech.duration = reply["duration"].get<double>();
        speech.timings = estimate_word_timings(narration, speech.duration);
        speech.report.advise("estimated-word-timings", "/words",
                             "the text-to-speech service returned no word timings; estimated from character counts");
        return speech;
    }
    if (words.size() != tokens.size()) {
        throw Error(Errc::tts_failure, std::to_string(words.size()) + " word timings for " +
                                           std::to_string(tokens.size()) + " narration tokens");
    }
    try {
        for (std::size_t i = 0; i < words.size(); ++i) {
            speech.timings.push_back(WordTiming{words[i].at("word").get<std::string>(), words[i].at("start").get<double>(),
                                                words[i].at("end").get<double>(), tokens[i].second});
        }
    } catch (const Json::exception& e) {
        throw Error(Errc::tts_failure, std::string("malformed word timing: ") + e.what());
    }
    speech.duration = reply.contains("duration") && reply["duration"].is_number() ? reply["duration"].get<double>()
                                                                                  : speech.timings.back().end;
    return speech;
}

ValidationReport check_word_timings(const std::vector<WordTiming>& timings, std::string_view narration) {
    ValidationReport report;
    const auto tokens = tokenize_words(narration);
    if (timings.size() != tokens.size()) {
        report.fail("word-count", "/words",
                    std::to_string(timings.size()) + " timings for " + std::to_string(tokens.size()) + " tokens");
        return report;
    }
    for (std::size_t i = 0; i < timings.size(); ++i) {
        const auto& w = timings[i];
        const std::string path = "/words/" + std::to_string(i);
        if (w.word != tokens[i].first) report.fail("word-text", path, "'" + w.word + "' != '" + tokens[i].first + "'");
        if (w.char_span != tokens[i].second) report.fail("word-span", path, "character span does not match the token");
        if (w.start < 0.0 || !(w.end > w.start)) report.fail("word-interval", path, "end must follow start");
        if (i > 0 && w.start < timings[i - 1].end) report.fail("word-overlap", path, "overlaps the previous word");
    }
    return report;
}

Speech synthesize_speech(std::string_view narration, SpeechSynthesizer& tts, const std::filesystem::path& audio_path) {
    if (trim(narration).empty()) throw Error(Errc::empty_narration, "nothing to speak");
    Speech speech = tts.synthesize(narration, audio_path);
    const ValidationReport contract = check_word_timings(speech.timings, narration);
    if (!contract.passing()) {
        const auto& v = contract.violations.front();
        throw Error(Errc::tts_failure, "word timings break the contract: " + v.path + " " + v.message);
    }
    if (speech.duration < speech.timings.back().end) {
        throw Error(Errc::tts_failure, "audio duration is shorter than the last word");
    }
    return speech;
}

// ---------------------------------------------------------------------------
// Video synthesis

std::size_t frame_count(double duration, int fps) {
    return static_cast<std::size_t>(std::ceil(duration * fps - 1e-9));
}

std::vector<std::string> visible_elements(const Timeline& timeline, const SvgDoc& svg, double t) {
    std::vector<char> visible(svg.size(), 0);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < svg.size(); ++i) {
        const SvgElement& el = svg.at(i);
        bool shown = !el.parent || visible[*el.parent];
        if (shown) {
            const bool tracked = timeline.tracks.contains(el.id);
            const auto vis = timeline.initial_visibility.find(el.id);
            if (!tracked && vis != timeline.initial_visibility.end() && vis->second == Visibility::hidden) {
                shown = false;
            } else if (tracked) {
                shown = state_at(timeline, el.id, t).visible();
            }
        }
        visible[i] = shown;
        if (shown) out.push_back(el.id);
    }
    return out;
}

Json mock_video_manifest(const Timeline& timeline, const SvgDoc& svg, int fps) {
    const std::size_t frames = frame_count(timeline.duration, fps);
    Json list = Json::array();
    for (std::size_t k = 0; k < frames; ++k) {
        const double t = static_cast<double>(k) / fps;
        const auto visible = visible_elements(timeline, svg, t);
        std::string joined;
        for (const auto& id : visible) joined += id + "\n";
        Json hidden = Json::array();
        Json dimmed = Json::array();
        std::size_t v = 0;
        for (const auto& el : svg.elements()) {
            if (v < visible.size() && visible[v] == el.id) {
                ++v;
                const double opacity = property_at(timeline, el.id, Property::opacity, t);
                if (opacity > 0.0 && opacity < 1.0) dimmed.push_back(el.id);
            } else {
                hidden.push_back(el.id);
            }
        }
        list.push_back(Json{{"t", t}, {"visible_digest", sha256_hex(joined)}, {"hidden", std::move(hidden)},
                            {"dimmed", std::move(dimmed)}});
    }
    Json out = Json::object();
    out["fps"] = fps;
    out["duration"] = timeline.duration;
    out["frame_count"] = frames;
    out["frames"] = std::move(list);
    return out;
}

std::filesystem::path MockVideoSynthesizer::synthesize(const SynthRequest& request) {
    try {
        const Timeline timeline = timeline_from_json(Json::parse(read_file(request.timeline)));
        const SvgDoc svg = parse_svg(read_file(request.svg));
        if (!std::filesystem::exists(request.audio)) throw Error(Errc::synth_failure, "missing audio file");
        const auto path = request.output_dir / "video_manifest.json";
        write_file_atomic(path, mock_video_manifest(timeline, svg, request.fps).dump(2) + "\n");
        return path;
    } catch (const Json::exception& e) {
        throw Error(Errc::synth_failure, e.what());
    }
}

std::filesystem::path CommandVideoSynthesizer::synthesize(const SynthRequest& request) {
    const auto output = request.output_dir / "video.mp4";
    std::string command = command_;
    command = replace_all(command, "{timeline}", shell_quote(request.timeline.string()));
    command = replace_all(command, "{svg}", shell_quote(request.svg.string()));
    command = replace_all(command, "{audio}", shell_quote(request.audio.string()));
    command = replace_all(command, "{output}", shell_quote(output.string()));
    command = replace_all(command, "{fps}", std::to_string(request.fps));
    const auto result = run_command(command, "", timeout_);
    if (result.timed_out) throw Error(Errc::synth_failure, "video synthesizer timed out");
    if (result.exit_code != 0) {
        throw Error(Errc::synth_failure, "exit code " + std::to_string(result.exit_code) + ": " + first_line(result.err));
    }
    if (!std::filesystem::exists(output)) throw Error(Errc::synth_failure, "no video file was written");
    return output;
}

std::filesystem::path synthesize_video(const SynthRequest& request, VideoSynthesizer& synth) {
    double duration = 0.0;
    try {
        duration = Json::parse(read_file(request.timeline)).at("duration").get<double>();
    } catch (const Json::exception& e) {
        throw Error(Errc::synth_failure, std::string("unreadable timeline: ") + e.what());
    }
    if (!(duration > 0.0)) throw Error(Errc::synth_failure, "the timeline has zero duration");
    if (request.fps <= 0) throw Error(Errc::synth_failure, "fps must be positive");
    return synth.synthesize(request);
}

}  // namespace datavideo
