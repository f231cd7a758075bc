from __future__ import annotations

import json

import numpy as np
import pytest

from earsim import AudioBuffer, compare_channels, read_spectrogram
from earsim.cli import main

from signals import mixed_reference, tone, with_noise_at_snr


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def identity_pair(wav_factory):
    clip = tone(440.0, duration=0.3)
    return wav_factory(clip, name="ref.wav"), wav_factory(clip, name="deg.wav")


@pytest.fixture
def degraded_pair(wav_factory):
    ref = mixed_reference(duration=0.3)
    deg = with_noise_at_snr(ref, 15.0)
    return wav_factory(ref, name="ref.wav"), wav_factory(deg, name="deg.wav")


class TestCompare:
    def test_identity_text_output(self, capsys, identity_pair):
        ref, deg = identity_pair
        code, out, err = run(capsys, "compare", str(ref), str(deg))
        assert code == 0
        assert err == ""
        assert "channel 0: similarity 1.000000  distance 0.000000" in out
        assert "aggregate distance: 0.000000" in out
        assert "mos: 5.000000" in out

    def test_json_is_one_line_and_full_precision(self, capsys, degraded_pair):
        ref, deg = degraded_pair
        code, out, err = run(capsys, "compare", str(ref), str(deg), "--format", "json")
        assert code == 0
        assert len(out.strip().splitlines()) == 1
        payload = json.loads(out)
        from earsim import load_audio

        expected = compare_channels(load_audio(ref), load_audio(deg))
        assert payload["mos"] == expected.mos
        assert payload["aggregate_distance"] == expected.aggregate_distance
        assert payload["per_channel_similarity"] == list(expected.per_channel_similarity)

    def test_missing_file_names_path(self, capsys, tmp_path):
        ghost = tmp_path / "ghost.wav"
        real = tmp_path / "real.wav"
        from earsim import write_wav

        write_wav(real, tone(440.0, 0.2))
        code, out, err = run(capsys, "compare", str(real), str(ghost))
        assert code == 3
        assert "ghost.wav" in err

    def test_channel_mismatch_exit_code(self, capsys, wav_factory):
        mono = tone(440.0, 0.2)
        stereo = AudioBuffer(
            samples=np.vstack([mono.channel(0), mono.channel(0)]), sample_rate=48000
        )
        code, _, err = run(
            capsys, "compare", str(wav_factory(stereo)), str(wav_factory(mono))
        )
        assert code == 14
        assert "channel" in err

    def test_not_a_wav_exit_code(self, capsys, tmp_path, wav_factory):
        junk = tmp_path / "junk.wav"
        junk.write_bytes(b"this is not audio")
        code, _, err = run(capsys, "compare", str(wav_factory(tone(440.0, 0.2))), str(junk))
        assert code == 4

    def test_comparison_flags_are_applied(self, capsys, degraded_pair):
        ref, deg = degraded_pair
        code, out, _ = run(
            capsys,
            "compare", str(ref), str(deg),
            "--exponent", "1.0",
            "--normalization", "0.5",
            "--nsim-window", "4x4",
            "--format", "json",
        )
        assert code == 0
        default = run(capsys, "compare", str(ref), str(deg), "--format", "json")[1]
        assert json.loads(out)["mos"] != json.loads(default)["mos"]

    def test_bad_exponent_exit_code(self, capsys, identity_pair):
        ref, deg = identity_pair
        code, _, err = run(capsys, "compare", str(ref), str(deg), "--exponent", "1.5")
        assert code == 9
        assert "exponent" in err

    def test_malformed_window_is_a_usage_error(self, capsys, identity_pair):
        ref, deg = identity_pair
        with pytest.raises(SystemExit) as excinfo:
            main(["compare", str(ref), str(deg), "--nsim-window", "8by8"])
        assert excinfo.value.code == 2


@pytest.fixture
def manifest(tmp_path, wav_factory):
    reference = mixed_reference(duration=0.3)
    ref_path = wav_factory(reference, name="ref.wav")
    rows = ["reference,degraded,score"]
    for snr, human in zip([40.0, 30.0, 20.0, 10.0], [5.0, 3.0, 4.0, 1.0]):
        deg = wav_factory(with_noise_at_snr(reference, snr), name=f"snr_{int(snr)}.wav")
        rows.append(f"{ref_path.name},{deg.name},{human}")
    path = tmp_path / "ratings.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


class TestEvaluate:
    def test_table_output(self, capsys, manifest):
        code, out, err = run(capsys, "evaluate", str(manifest))
        assert code == 0
        assert "pairs scored: 4" in out
        assert "pairs excluded: 0" in out
        assert "srcc: 0.800000" in out
        assert "krcc: 0.666667" in out

    def test_json_output(self, capsys, manifest):
        code, out, _ = run(capsys, "evaluate", str(manifest), "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["n"] == 4
        assert payload["excluded"] == []
        assert payload["srcc"] == pytest.approx(0.8, abs=1e-12)

    def test_per_pair_csv(self, capsys, manifest, tmp_path):
        out_csv = tmp_path / "pairs.csv"
        code, _, _ = run(capsys, "evaluate", str(manifest), "--per-pair-out", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "reference,degraded,human_score,mos,aggregate_distance"
        assert len(lines) == 5
        mos_values = [float(line.split(",")[3]) for line in lines[1:]]
        assert all(1.0 <= m <= 5.0 for m in mos_values)
        assert mos_values == sorted(mos_values, reverse=True)

    def test_unreadable_pair_reported(self, capsys, manifest):
        with manifest.open("a") as handle:
            handle.write("ref.wav,not_there.wav,2.0\n")
        code, out, _ = run(capsys, "evaluate", str(manifest))
        assert code == 0
        assert "pairs scored: 4" in out
        assert "pairs excluded: 1" in out
        assert "not_there.wav" in out

    def test_empty_manifest_exit_code(self, capsys, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("reference,degraded,score\n")
        code, _, err = run(capsys, "evaluate", str(path))
        assert code == 18
        assert "empty manifest" in err

    def test_parse_error_names_line(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("reference,degraded,score\na.wav,b.wav,1\nc.wav,d.wav,best\n")
        code, _, err = run(capsys, "evaluate", str(path))
        assert code == 20
        assert ":3:" in err

    def test_scatter_figure(self, capsys, manifest, tmp_path):
        figure = tmp_path / "scatter.png"
        code, _, _ = run(capsys, "evaluate", str(manifest), "--figure-out", str(figure))
        assert code == 0
        assert figure.stat().st_size > 0


class TestSpectrogram:
    def test_binary_export_round_trips(self, capsys, wav_factory, tmp_path):
        path = wav_factory(tone(1000.0, duration=0.5))
        out = tmp_path / "clip.psg"
        code, text, _ = run(capsys, "spectrogram", str(path), str(out))
        assert code == 0
        spec = read_spectrogram(out)
        assert spec.n_frames == 42  # floor(0.5 * 85)
        assert spec.n_bins == 128
        assert f"{spec.n_frames} frames x {spec.n_bins} bins" in text

    def test_csv_and_figure_outputs(self, capsys, wav_factory, tmp_path):
        path = wav_factory(tone(500.0, duration=0.2))
        out = tmp_path / "clip.psg"
        csv_out = tmp_path / "clip.csv"
        figure = tmp_path / "clip.png"
        code, _, _ = run(
            capsys,
            "spectrogram", str(path), str(out),
            "--csv-out", str(csv_out),
            "--figure-out", str(figure),
        )
        assert code == 0
        header = csv_out.read_text().splitlines()[0]
        assert header.startswith("bin_0,") and header.endswith("bin_127")
        assert figure.stat().st_size > 0

    def test_json_reports_shape(self, capsys, wav_factory, tmp_path):
        path = wav_factory(tone(500.0, duration=0.2))
        out = tmp_path / "clip.psg"
        code, text, _ = run(capsys, "spectrogram", str(path), str(out), "--format", "json")
        payload = json.loads(text)
        assert code == 0
        assert payload == {
            "out": str(out),
            "n_frames": 17,
            "n_bins": 128,
            "frame_rate": 85,
        }

    def test_channel_selection(self, capsys, wav_factory, tmp_path):
        left = tone(300.0, 0.2).channel(0)
        right = tone(3000.0, 0.2).channel(0)
        stereo = AudioBuffer(samples=np.vstack([left, right]), sample_rate=48000)
        path = wav_factory(stereo)
        out_left = tmp_path / "left.psg"
        out_right = tmp_path / "right.psg"
        assert run(capsys, "spectrogram", str(path), str(out_left), "--channel", "0")[0] == 0
        assert run(capsys, "spectrogram", str(path), str(out_right), "--channel", "1")[0] == 0
        left_spec = read_spectrogram(out_left)
        right_spec = read_spectrogram(out_right)
        assert left_spec.frames.mean(axis=0).argmax() < right_spec.frames.mean(axis=0).argmax()

    def test_channel_out_of_range(self, capsys, wav_factory, tmp_path):
        path = wav_factory(tone(440.0, 0.2))
        code, _, err = run(capsys, "spectrogram", str(path), str(tmp_path / "x.psg"), "--channel", "3")
        assert code == 9
        assert "channel 3" in err


class TestBench:
    def test_reports_timing(self, capsys, wav_factory):
        path = wav_factory(tone(440.0, duration=0.1))
        code, out, _ = run(capsys, "bench", str(path), "--repetitions", "2")
        assert code == 0
        assert "mean:" in out
        assert "repetitions: 2" in out

    def test_json_fields(self, capsys, wav_factory):
        path = wav_factory(tone(440.0, duration=0.1))
        code, out, _ = run(capsys, "bench", str(path), "--repetitions", "2", "--format", "json")
        payload = json.loads(out)
        assert code == 0
        assert payload["repetitions"] == 2
        assert payload["duration_s"] == pytest.approx(0.1, rel=1e-6)
        assert payload["mean_s"] > 0.0
        assert payload["stddev_s"] >= 0.0
        assert payload["peak_memory_mib"] > 0.0

    def test_zero_repetitions_rejected(self, capsys, wav_factory):
        path = wav_factory(tone(440.0, duration=0.1))
        code, _, err = run(capsys, "bench", str(path), "--repetitions", "0")
        assert code == 8
        assert "repetitions" in err


class TestTopLevel:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert capsys.readouterr().out.startswith("earsim ")

    def test_no_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2
