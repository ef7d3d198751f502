import logging
import struct
import wave

import numpy as np
import pytest

from conftest import RATE, make_synth_corpus, silence, write_wav
from emorhythm.corpus import (
    CODE_FOR_EMOTION,
    EMOTION_CODES,
    EmotionLabel,
    EmptyCorpus,
    LabeledDataset,
    MalformedWav,
    SchemaMismatch,
    UnknownEmotionCode,
    UnrecognizedName,
    UnsupportedEncoding,
    load_corpus,
    load_feature_matrix,
    load_wav,
    parse_emodb_filename,
    save_feature_matrix,
)
from emorhythm.features import build_schema


class TestLoadWav:
    def test_silence(self, tmp_path):
        path = tmp_path / "a.wav"
        write_wav(path, silence(0.1))
        clip = load_wav(path)
        assert len(clip.samples) == 1600
        assert clip.sample_rate == RATE
        assert np.all(clip.samples == 0.0)
        assert clip.source_id == "a"

    def test_max_amplitude_scaling(self, tmp_path):
        path = tmp_path / "m.wav"
        ints = np.array([32767, -32768, 0], dtype="<i2")
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(RATE)
            w.writeframes(ints.tobytes())
        clip = load_wav(path)
        assert clip.samples[0] == pytest.approx(32767 / 32768)
        assert clip.samples[1] == -1.0
        assert np.all(np.abs(clip.samples) <= 1.0)

    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        samples = rng.uniform(-0.9, 0.9, 777)
        first = tmp_path / "one.wav"
        write_wav(first, samples)
        clip = load_wav(first)
        second = tmp_path / "two.wav"
        ints = (clip.samples * 32768.0).astype("<i2")
        with wave.open(str(second), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(clip.sample_rate)
            w.writeframes(ints.tobytes())
        assert first.read_bytes() == second.read_bytes()

    def test_stereo_downmix(self, tmp_path):
        path = tmp_path / "s.wav"
        left = np.full(100, 0.5)
        right = np.full(100, -0.25)
        interleaved = np.empty(200)
        interleaved[0::2] = left
        interleaved[1::2] = right
        write_wav(path, interleaved, channels=2)
        clip = load_wav(path)
        assert len(clip.samples) == 100
        assert np.allclose(clip.samples, (0.5 - 0.25) / 2, atol=1e-4)

    def test_not_riff(self, tmp_path):
        path = tmp_path / "x.wav"
        path.write_bytes(b"this is not audio at all, promise")
        with pytest.raises(MalformedWav):
            load_wav(path)

    def test_truncated_data_chunk(self, tmp_path):
        path = tmp_path / "t.wav"
        write_wav(path, silence(0.01))
        data = path.read_bytes()
        path.write_bytes(data[:-40])
        with pytest.raises(MalformedWav):
            load_wav(path)

    def test_empty_stream(self, tmp_path):
        path = tmp_path / "e.wav"
        write_wav(path, np.array([]))
        with pytest.raises(MalformedWav):
            load_wav(path)

    def test_non_pcm_rejected(self, tmp_path):
        path = tmp_path / "f.wav"
        write_wav(path, silence(0.01))
        raw = bytearray(path.read_bytes())
        # format tag lives at offset 20 in a canonical fmt chunk
        struct.pack_into("<H", raw, 20, 3)
        path.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedEncoding):
            load_wav(path)

    def test_wrong_bit_depth_rejected(self, tmp_path):
        path = tmp_path / "b.wav"
        ints = np.zeros(64, dtype=np.int8)
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(1)
            w.setframerate(RATE)
            w.writeframes(ints.tobytes())
        with pytest.raises(UnsupportedEncoding):
            load_wav(path)


class TestFilenameParsing:
    def test_reference_name(self):
        meta = parse_emodb_filename("03a01Wa.wav")
        assert meta.speaker_id == 3
        assert meta.text_id == "a01"
        assert meta.emotion is EmotionLabel.ANGER
        assert meta.variant == "a"

    def test_sadness_speaker_16(self):
        meta = parse_emodb_filename("16b10Tb.wav")
        assert meta.speaker_id == 16
        assert meta.emotion is EmotionLabel.SADNESS

    def test_unknown_emotion_letter(self):
        with pytest.raises(UnknownEmotionCode):
            parse_emodb_filename("03a01Xa.wav")

    @pytest.mark.parametrize("name", ["3a01Wa.wav", "03a1Wa.wav", "03a01W.wav",
                                      "03a01Wa.mp3", "readme.txt"])
    def test_pattern_mismatch(self, name):
        with pytest.raises(UnrecognizedName):
            parse_emodb_filename(name)

    def test_code_mapping_is_bijection(self):
        assert len(EMOTION_CODES) == 7
        assert len(set(EMOTION_CODES.values())) == 7
        for code, label in EMOTION_CODES.items():
            assert CODE_FOR_EMOTION[label] == code


class TestLoadCorpus:
    def test_sorted_and_counted(self, small_corpus_dir):
        entries = load_corpus(small_corpus_dir)
        assert len(entries) == 14
        names = [clip.source_id for clip, _ in entries]
        assert names == sorted(names)

    def test_deterministic(self, small_corpus_dir):
        a = [c.source_id for c, _ in load_corpus(small_corpus_dir)]
        b = [c.source_id for c, _ in load_corpus(small_corpus_dir)]
        assert a == b

    def test_empty_directory(self, tmp_path):
        with pytest.raises(EmptyCorpus):
            load_corpus(tmp_path)

    def test_skips_bad_files_with_warning(self, tmp_path, caplog):
        make_synth_corpus(tmp_path, per_class=1)
        n_good = len(list(tmp_path.iterdir()))
        (tmp_path / "03a01Fa.wav").write_bytes(b"broken")  # valid name, bad audio
        with caplog.at_level(logging.WARNING):
            entries = load_corpus(tmp_path)
        assert len(entries) == n_good
        assert sum("skipping" in rec.message for rec in caplog.records) == 1


def _random_dataset(n=3, seed=0):
    schema = build_schema()
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, len(schema)))
    labels = ["anger", "sadness", "neutral"][:n]
    return LabeledDataset(schema, X, labels, [3, 8, 9][:n], [f"u{i}" for i in range(n)])


class TestFeatureMatrixIo:
    def test_round_trip(self, tmp_path):
        ds = _random_dataset()
        path = tmp_path / "m.csv"
        save_feature_matrix(ds, path)
        loaded = load_feature_matrix(path)
        assert np.array_equal(loaded.X, ds.X)
        assert loaded.labels == ds.labels
        assert loaded.speakers == ds.speakers
        assert loaded.source_ids == ds.source_ids

    def test_missing_column_rejected(self, tmp_path):
        ds = _random_dataset()
        path = tmp_path / "m.csv"
        save_feature_matrix(ds, path)
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        del header[5]
        body = []
        for line in lines[1:]:
            cells = line.split(",")
            del cells[5]
            body.append(",".join(cells))
        path.write_text("\n".join([",".join(header)] + body) + "\n")
        with pytest.raises(SchemaMismatch):
            load_feature_matrix(path)

    def test_permuted_header_rejected(self, tmp_path):
        ds = _random_dataset()
        path = tmp_path / "m.csv"
        save_feature_matrix(ds, path)
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        header[0], header[1] = header[1], header[0]
        path.write_text("\n".join([",".join(header)] + lines[1:]) + "\n")
        with pytest.raises(SchemaMismatch):
            load_feature_matrix(path)

    def test_duplicate_source_ids_invalid(self):
        ds = _random_dataset()
        ds.source_ids = ["same", "same", "other"]
        with pytest.raises(SchemaMismatch):
            ds.validate()

    def test_non_finite_invalid(self):
        ds = _random_dataset()
        ds.X[0, 0] = np.nan
        with pytest.raises(SchemaMismatch):
            ds.validate()
