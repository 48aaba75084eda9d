import wave

import numpy as np
import pytest
from PIL import Image

from holocap.ingest import (
    AudioDecodeError,
    AudioTrack,
    DecoderError,
    FrameDirectoryError,
    FrameSample,
    extract_audio,
    sample_frames,
)
from holocap.manifest import VideoAsset

from conftest import write_frame_video


def test_frame_count_and_timestamps(frame_video_factory):
    asset = frame_video_factory("v1", duration_s=3.0, rate_fps=4.0)
    frames = sample_frames(asset, rate_fps=4.0)
    assert len(frames) == 12
    assert [f.index for f in frames] == list(range(12))
    for f in frames:
        assert f.timestamp_s == pytest.approx(f.index / 4.0)
        assert f.video_id == "v1"
        assert (f.width, f.height) == (32, 24)
        assert len(f.pixels) == 32 * 24 * 3


def test_integer_stride_subsampling(frame_video_factory, tmp_path):
    asset = frame_video_factory("v2", duration_s=3.0, rate_fps=4.0)
    frames = sample_frames(asset, rate_fps=2.0)
    assert len(frames) == 6
    # stride 2 picks extracted frames 0, 2, 4, ...; the factory alternates
    # two solid colors per extracted index, so every picked frame is color 0
    first_pixel = frames[0].pixels[:3]
    assert all(f.pixels[:3] == first_pixel for f in frames)
    assert frames[-1].timestamp_s == pytest.approx(5 / 2.0)


def test_non_divisible_rate_rejected(frame_video_factory):
    asset = frame_video_factory("v3", duration_s=3.0, rate_fps=4.0)
    with pytest.raises(FrameDirectoryError, match="evenly divide"):
        sample_frames(asset, rate_fps=3.0)


def test_rate_above_available_rejected(frame_video_factory):
    asset = frame_video_factory("v4", duration_s=3.0, rate_fps=4.0)
    with pytest.raises(FrameDirectoryError, match="exceeds"):
        sample_frames(asset, rate_fps=8.0)


def test_missing_sidecar_rejected(frame_video_factory, tmp_path):
    asset = frame_video_factory("v5")
    (tmp_path / "media" / "v5" / "frames.json").unlink()
    with pytest.raises(FrameDirectoryError, match="sidecar"):
        sample_frames(asset, rate_fps=4.0)


def test_missing_frame_file_rejected(frame_video_factory, tmp_path):
    asset = frame_video_factory("v6", duration_s=2.0, rate_fps=4.0)
    (tmp_path / "media" / "v6" / "frame_00005.png").unlink()
    with pytest.raises(FrameDirectoryError, match="frame_00005"):
        sample_frames(asset, rate_fps=4.0)


def test_frame_size_mismatch_rejected(frame_video_factory, tmp_path):
    asset = frame_video_factory("v7", duration_s=2.0, rate_fps=4.0)
    Image.new("RGB", (8, 8), (0, 0, 0)).save(tmp_path / "media" / "v7" / "frame_00003.png")
    with pytest.raises(FrameDirectoryError, match="does not match sidecar"):
        sample_frames(asset, rate_fps=4.0)


def test_zero_frames_rejected(frame_video_factory):
    asset = frame_video_factory("v8", duration_s=0.1, rate_fps=4.0)
    with pytest.raises(FrameDirectoryError, match="zero frames"):
        sample_frames(asset, rate_fps=4.0)


def test_nonpositive_rate_rejected(frame_video_factory):
    asset = frame_video_factory("v9")
    with pytest.raises(ValueError, match="rate_fps"):
        sample_frames(asset, rate_fps=0.0)


def test_frame_sample_buffer_validation():
    with pytest.raises(ValueError, match="pixel buffer"):
        FrameSample("v", 0, 0.0, b"\x00" * 5, 2, 2)
    with pytest.raises(ValueError, match="dimensions"):
        FrameSample("v", 0, 0.0, b"", 0, 2)


def test_audio_round_trip(frame_video_factory):
    asset = frame_video_factory("a1", duration_s=2.0, audio_rate_hz=16_000)
    track = extract_audio(asset, sample_rate_hz=16_000)
    assert isinstance(track, AudioTrack)
    assert track.sample_rate_hz == 16_000
    assert len(track.samples) == 32_000
    assert track.duration_s == pytest.approx(2.0)
    assert track.pcm16_bytes() == track.samples.astype("<i2").tobytes()


def test_audio_absent_returns_none(frame_video_factory):
    asset = frame_video_factory("a2", has_audio=False)
    assert extract_audio(asset) is None


def test_audio_flagged_but_missing_rejected(frame_video_factory, tmp_path):
    asset = frame_video_factory("a3")
    (tmp_path / "media" / "a3" / "audio.wav").unlink()
    with pytest.raises(AudioDecodeError, match="audio.wav"):
        extract_audio(asset)


def test_audio_wrong_rate_rejected(frame_video_factory):
    asset = frame_video_factory("a4", audio_rate_hz=8_000)
    with pytest.raises(AudioDecodeError, match="sample rate"):
        extract_audio(asset, sample_rate_hz=16_000)


def test_audio_stereo_downmixed(tmp_path):
    directory = tmp_path / "media" / "a5"
    asset = write_frame_video(directory, "a5", has_audio=False)
    asset = VideoAsset(
        video_id="a5",
        media_path=str(directory),
        duration_s=asset.duration_s,
        has_audio=True,
        category_id=0,
        split="test",
    )
    with wave.open(str(directory / "audio.wav"), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(16_000)
        interleaved = np.array([1000, 3000, -400, -600], dtype="<i2")
        fh.writeframes(interleaved.tobytes())
    track = extract_audio(asset, sample_rate_hz=16_000)
    assert track.samples.tolist() == [2000, -500]


def test_audio_8bit_rejected(tmp_path):
    directory = tmp_path / "media" / "a6"
    asset = write_frame_video(directory, "a6", has_audio=False)
    asset = VideoAsset("a6", str(directory), asset.duration_s, True, 0, "test")
    with wave.open(str(directory / "audio.wav"), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(1)
        fh.setframerate(16_000)
        fh.writeframes(b"\x80\x80\x80\x80")
    with pytest.raises(AudioDecodeError, match="16-bit"):
        extract_audio(asset, sample_rate_hz=16_000)


FRAME_DECODER = """
import sys
from PIL import Image

inp, rate, outdir = sys.argv[1], float(sys.argv[2]), sys.argv[3]
n = int(float(open(inp).read().strip()) * rate)
for k in range(n):
    Image.new("RGB", (16, 12), (10 * k % 256, 0, 0)).save(f"{outdir}/frame_{k:05d}.png")
"""

AUDIO_DECODER = """
import struct
import sys
import wave

outwav, rate = sys.argv[1], int(sys.argv[2])
with wave.open(outwav, "wb") as fh:
    fh.setnchannels(1)
    fh.setsampwidth(2)
    fh.setframerate(rate)
    fh.writeframes(struct.pack("<4h", 100, 200, 300, 400))
"""


def test_decoder_mode_frames(tmp_path):
    script = tmp_path / "fake_frame_decoder.py"
    script.write_text(FRAME_DECODER, encoding="utf-8")
    media = tmp_path / "clip.bin"
    media.write_text("2.0", encoding="utf-8")
    asset = VideoAsset("d1", str(media), 2.0, True, 0, "test")
    template = f"python3 {script} {{input}} {{rate}} {{outdir}}"
    frames = sample_frames(asset, rate_fps=2.0, decoder_template=template, workdir=tmp_path)
    assert len(frames) == 4
    assert [f.timestamp_s for f in frames] == pytest.approx([0.0, 0.5, 1.0, 1.5])
    assert (frames[0].width, frames[0].height) == (16, 12)


def test_decoder_mode_audio(tmp_path):
    script = tmp_path / "fake_audio_decoder.py"
    script.write_text(AUDIO_DECODER, encoding="utf-8")
    media = tmp_path / "clip.bin"
    media.write_text("x", encoding="utf-8")
    asset = VideoAsset("d2", str(media), 2.0, True, 0, "test")
    template = f"python3 {script} {{outwav}} {{rate}}"
    track = extract_audio(asset, sample_rate_hz=16_000, decoder_template=template, workdir=tmp_path)
    assert track.samples.tolist() == [100, 200, 300, 400]
    assert track.sample_rate_hz == 16_000


def test_decoder_failure_surfaces_exit_code(tmp_path):
    media = tmp_path / "clip.bin"
    media.write_text("x", encoding="utf-8")
    asset = VideoAsset("d3", str(media), 2.0, True, 0, "test")
    template = 'python3 -c "import sys; sys.exit(3)"'
    with pytest.raises(DecoderError, match="exited 3"):
        sample_frames(asset, rate_fps=2.0, decoder_template=template, workdir=tmp_path)


def test_decoder_zero_frames_rejected(tmp_path):
    media = tmp_path / "clip.bin"
    media.write_text("x", encoding="utf-8")
    asset = VideoAsset("d4", str(media), 2.0, True, 0, "test")
    with pytest.raises(DecoderError, match="zero frames"):
        sample_frames(asset, rate_fps=2.0, decoder_template="python3 -c pass", workdir=tmp_path)


def test_decoder_no_audio_output_rejected(tmp_path):
    media = tmp_path / "clip.bin"
    media.write_text("x", encoding="utf-8")
    asset = VideoAsset("d5", str(media), 2.0, True, 0, "test")
    with pytest.raises(AudioDecodeError, match="no output"):
        extract_audio(asset, decoder_template="python3 -c pass", workdir=tmp_path)


def test_file_media_without_template_rejected(tmp_path):
    media = tmp_path / "clip.bin"
    media.write_text("x", encoding="utf-8")
    asset = VideoAsset("d6", str(media), 2.0, True, 0, "test")
    with pytest.raises(DecoderError, match="template"):
        sample_frames(asset, rate_fps=2.0)
    with pytest.raises(AudioDecodeError, match="template"):
        extract_audio(asset)


def test_unreadable_media_rejected(tmp_path):
    asset = VideoAsset("d7", str(tmp_path / "missing.bin"), 2.0, True, 0, "test")
    with pytest.raises(DecoderError, match="not readable"):
        sample_frames(asset, rate_fps=2.0, decoder_template="python3 -c pass")
    with pytest.raises(AudioDecodeError, match="not readable"):
        extract_audio(asset, decoder_template="python3 -c pass")
