"""CLI surface: subcommands, exit codes, env defaults."""

import json

import pytest

from conftest import gradient_image
from mosaic.cli import main
from mosaic.corpus import read_corpus_jsonl
from mosaic.promptseg import parse_prompt


@pytest.fixture
def content_file(tmp_path):
    path = tmp_path / "content.png"
    gradient_image(24, 24, seed=2).save(path)
    return path


class TestParseCommand:
    def test_prints_serialization(self, capsys):
        assert main(["parse", "--prompt", "tree in watercolor style"]) == 0
        assert capsys.readouterr().out.strip() == "tree <PAIR> watercolor"

    def test_parse_error_exit_code(self, capsys):
        assert main(["parse", "--prompt", "blue sky"]) == 4
        assert "error" in capsys.readouterr().err

    def test_empty_prompt_exit_code(self):
        assert main(["parse", "--prompt", "  "]) == 4

    def test_ambiguous_exit_code(self):
        assert main(["parse", "--prompt", "tree in the style of van gogh style"]) == 4


class TestCorpusCommand:
    def test_gen_with_packaged_lexicons(self, tmp_path, capsys):
        out = tmp_path / "corpus.jsonl"
        assert main(["corpus", "gen", "--count", "25", "--seed", "3", "--out", str(out)]) == 0
        records = read_corpus_jsonl(out)
        assert len(records) == 25
        for rec in records:
            assert parse_prompt(rec.prompt_text).phrases() == rec.gold.phrases()

    def test_gen_with_bad_template_file(self, tmp_path):
        bad = tmp_path / "templates.txt"
        bad.write_text("{obj} but never styled\n")
        out = tmp_path / "corpus.jsonl"
        assert main(["corpus", "gen", "--templates", str(bad), "--count", "1",
                     "--out", str(out)]) == 2


class TestRunCommand:
    def test_run_success(self, tmp_path, content_file, capsys):
        out_dir = tmp_path / "out"
        code = main(["run", "--image", str(content_file),
                     "--prompt", "tree in watercolor style and sky as cubism",
                     "--out", str(out_dir), "--seed", "4"])
        assert code == 0
        assert (out_dir / "manifest.json").exists()
        assert "artifacts written" in capsys.readouterr().out

    def test_missing_image_exit_2(self, tmp_path):
        assert main(["run", "--image", str(tmp_path / "nope.png"),
                     "--prompt", "tree in watercolor style",
                     "--out", str(tmp_path / "out")]) == 2

    def test_parse_failure_exit_4(self, tmp_path, content_file):
        assert main(["run", "--image", str(content_file), "--prompt", "blue sky",
                     "--out", str(tmp_path / "out")]) == 4

    def test_backend_failure_exit_3(self, tmp_path, content_file):
        assert main(["run", "--image", str(content_file),
                     "--prompt", "tree in watercolor style",
                     "--backend", "http", "--endpoint", "http://127.0.0.1:9",
                     "--timeout", "0.5", "--out", str(tmp_path / "out")]) == 3

    def test_http_without_endpoint_exit_2(self, tmp_path, content_file, monkeypatch):
        monkeypatch.delenv("MOSAIC_ENDPOINT", raising=False)
        assert main(["run", "--image", str(content_file),
                     "--prompt", "tree in watercolor style",
                     "--backend", "http", "--out", str(tmp_path / "out")]) == 2

    def test_endpoint_env_default(self, tmp_path, content_file, monkeypatch):
        monkeypatch.setenv("MOSAIC_ENDPOINT", "http://127.0.0.1:9")
        code = main(["run", "--image", str(content_file),
                     "--prompt", "tree in watercolor style",
                     "--backend", "http", "--timeout", "0.5",
                     "--out", str(tmp_path / "out")])
        assert code == 3  # endpoint picked up from the environment, then refused

    def test_config_file(self, tmp_path, content_file):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"image = {content_file}\nprompt = tree in watercolor style\n"
            f"out = {tmp_path / 'out'}\nseed = 8\n"
        )
        assert main(["run", "--config", str(cfg)]) == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["seed"] == 8

    def test_unknown_flag_exit_2(self, content_file):
        assert main(["run", "--image", str(content_file), "--frobnicate"]) == 2


class TestBenchCommand:
    def test_bench_table(self, tmp_path, content_file, capsys):
        code = main(["bench", "--iterations", "3", "--image", str(content_file),
                     "--prompt", "tree in watercolor style",
                     "--out", str(tmp_path / "out")])
        assert code == 0
        table = capsys.readouterr().out
        for stage in ("parse", "encode_text", "encode_image", "mask", "stylize", "composite"):
            assert stage in table


class TestEvalCommand:
    def test_eval_run_dir(self, tmp_path, content_file, capsys):
        out_dir = tmp_path / "out"
        assert main(["run", "--image", str(content_file),
                     "--prompt", "tree in watercolor style and sky as cubism",
                     "--out", str(out_dir), "--seed", "4"]) == 0
        report_file = tmp_path / "report.json"
        assert main(["eval", "--run", str(out_dir), "--out", str(report_file)]) == 0
        report = json.loads(report_file.read_text())
        assert 0.0 <= report["aggregate"] <= 1.0
        assert report["seed"] == 4

    def test_eval_requires_inputs(self):
        assert main(["eval"]) == 2

    def test_eval_missing_manifest_exit_2(self, tmp_path):
        assert main(["eval", "--run", str(tmp_path)]) == 2
