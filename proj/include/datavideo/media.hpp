#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "datavideo/core_model.hpp"
#include "datavideo/svg.hpp"
#include "datavideo/timeline.hpp"

namespace datavideo {

inline constexpr int default_fps = 30;
inline constexpr double mock_seconds_per_word = 0.3;
inline constexpr std::chrono::milliseconds default_adapter_timeout{120'000};

// ---------------------------------------------------------------------------
// Visualization renderer: Vega-Lite spec in, SVG out (see svg_binding.hpp for
// the metadata contract).

class Renderer {
public:
    virtual ~Renderer() = default;
    virtual std::string render(const Json& spec) = 0;
};

// Deterministic in-process renderer for the subset of Vega-Lite used by the
// agents: unit and layered views; bar, line, area, point, circle, square,
// arc, text, rule and tick marks; filter transforms. Throws
// RendererRejectedSpec for anything else.
class MockRenderer : public Renderer {
public:
    std::string render(const Json& spec) override;
};

// Spec on standard input, SVG on standard output.
class CommandRenderer : public Renderer {
public:
    explicit CommandRenderer(std::string command, std::chrono::milliseconds timeout = default_adapter_timeout)
        : command_(std::move(command)), timeout_(timeout) {}
    std::string render(const Json& spec) override;

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
};

// Renders and checks the metadata contract. Throws RendererRejectedSpec,
// RendererCrashed, MetadataMissing, XmlParseError and NotSvg.
std::string render_visualization(const Json& spec, Renderer& renderer);

// ---------------------------------------------------------------------------
// Text to speech

struct Speech {
    std::filesystem::path audio;
    double duration = 0.0;
    std::vector<WordTiming> timings;
    ValidationReport report;  // advisories such as estimated timings
};

class SpeechSynthesizer {
public:
    virtual ~SpeechSynthesizer() = default;
    // Writes the audio file to audio_path.
    virtual Speech synthesize(std::string_view narration, const std::filesystem::path& audio_path) = 0;
};

// Fixed 0.3 s per whitespace token, contiguous, with a silent WAV file.
class MockSpeechSynthesizer : public SpeechSynthesizer {
public:
    Speech synthesize(std::string_view narration, const std::filesystem::path& audio_path) override;
};

// The command receives the narration on standard input with {audio}
// replaced by the output path, and prints
// {"duration": seconds, "words": [{"word", "start", "end"}, ...]}.
// Missing words are estimated from the duration.
class CommandSpeechSynthesizer : public SpeechSynthesizer {
public:
    explicit CommandSpeechSynthesizer(std::string command,
                                      std::chrono::milliseconds timeout = default_adapter_timeout)
        : command_(std::move(command)), timeout_(timeout) {}
    Speech synthesize(std::string_view narration, const std::filesystem::path& audio_path) override;

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
};

// Spreads the duration over the narration's tokens in proportion to their
// character counts.
std::vector<WordTiming> estimate_word_timings(std::string_view narration, double duration);

// Token count and text, ordering, and non-overlap of word timings.
ValidationReport check_word_timings(const std::vector<WordTiming>& timings, std::string_view narration);

// Throws EmptyNarration and TtsFailure (including contract violations).
Speech synthesize_speech(std::string_view narration, SpeechSynthesizer& tts, const std::filesystem::path& audio_path);

// Mono 16-bit PCM silence.
std::string silent_wav(double seconds, int sample_rate = 8000);

// ---------------------------------------------------------------------------
// Video synthesis

struct SynthRequest {
    std::filesystem::path timeline;  // timeline.json
    std::filesystem::path svg;       // annotated chart, the canvas every track refers to
    std::filesystem::path audio;
    std::filesystem::path output_dir;
    int fps = default_fps;
};

class VideoSynthesizer {
public:
    virtual ~VideoSynthesizer() = default;
    virtual std::filesystem::path synthesize(const SynthRequest& request) = 0;
};

// Writes video_manifest.json describing every frame instead of pixels.
class MockVideoSynthesizer : public VideoSynthesizer {
public:
    std::filesystem::path synthesize(const SynthRequest& request) override;
};

// Placeholders {timeline}, {svg}, {audio}, {output} and {fps} are replaced by
// quoted values; the command must create {output} (video.mp4).
class CommandVideoSynthesizer : public VideoSynthesizer {
public:
    explicit CommandVideoSynthesizer(std::string command,
                                     std::chrono::milliseconds timeout = default_adapter_timeout)
        : command_(std::move(command)), timeout_(timeout) {}
    std::filesystem::path synthesize(const SynthRequest& request) override;

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
};

// Throws SynthFailure for a zero-length timeline or a failing synthesizer.
std::filesystem::path synthesize_video(const SynthRequest& request, VideoSynthesizer& synth);

std::size_t frame_count(double duration, int fps);

// Ids of elements drawn at time t: the element and all its ancestors are
// visible. Document order.
std::vector<std::string> visible_elements(const Timeline& timeline, const SvgDoc& svg, double t);

// {fps, duration, frame_count, frames: [{t, visible_digest, hidden, dimmed}]}
Json mock_video_manifest(const Timeline& timeline, const SvgDoc& svg, int fps);

// ---------------------------------------------------------------------------
// Self-contained HTML export

// The SVG with SMIL animations equivalent to the keyframe tracks, an audio
// element referencing audio_ref, and a script keeping them in sync.
std::string export_html(const Timeline& timeline, const SvgDoc& svg, const std::string& audio_ref);

}  // namespace datavideo
