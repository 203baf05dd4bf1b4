import hashlib
import json

import pytest

from ragnoise.manifest import (
    build_run_manifest,
    config_hash,
    file_digest,
    write_run_manifest,
)
from ragnoise.prompts import (
    default_answer_instruction,
    default_compress_instruction,
    load_instruction,
)


class TestDigests:
    def test_file_digest_matches_sha256(self, tmp_path):
        p = tmp_path / "x.bin"
        p.write_bytes(b"hello \xe2\x86\x92 world")
        assert file_digest(p) == hashlib.sha256(b"hello \xe2\x86\x92 world").hexdigest()

    def test_config_hash_key_order_independent(self):
        assert config_hash({"a": 1, "b": [2, 3]}) == config_hash({"b": [2, 3], "a": 1})

    def test_config_hash_value_sensitive(self):
        assert config_hash({"a": 1}) != config_hash({"a": 2})


class TestRunManifest:
    def test_fields(self, tmp_path):
        inp = tmp_path / "in.jsonl"
        inp.write_text("{}\n", encoding="utf-8")
        man = build_run_manifest("classify", {"k": 5}, [inp], {"records": 1}, "0.1.0", seed=9)
        assert man["command"] == "classify"
        assert man["config"] == {"k": 5}
        assert man["config_hash"] == config_hash({"k": 5})
        assert man["inputs"] == {str(inp): file_digest(inp)}
        assert man["seed"] == 9
        assert man["tool_version"] == "0.1.0"
        assert man["counts"] == {"records": 1}
        assert "T" in man["created_at"]

    def test_write_is_sorted_json(self, tmp_path):
        man = build_run_manifest("x", {}, [], {}, "0")
        out = tmp_path / "m.json"
        write_run_manifest(out, man)
        loaded = json.loads(out.read_text(encoding="utf-8"))
        assert loaded == man
        keys = list(loaded)
        assert keys == sorted(keys)


class TestInstructions:
    def test_defaults_nonempty_and_distinct(self):
        c = default_compress_instruction()
        a = default_answer_instruction()
        assert c and a and c != a

    def test_load_falls_back_to_default(self):
        assert load_instruction(None, "fallback") == "fallback"

    def test_load_reads_and_strips(self, tmp_path):
        p = tmp_path / "inst.txt"
        p.write_text("  be terse  \n", encoding="utf-8")
        assert load_instruction(p, "unused") == "be terse"

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.txt"
        p.write_text("   \n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_instruction(p, "unused")
