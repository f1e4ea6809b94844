import pytest

from audiosum.audio_io import write_wav
from synthetic import broadcast, write_transcript


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Three ~60 s training broadcasts with transcripts, a training manifest
    using relative paths, and a separate 60 s file to summarize."""
    root = tmp_path_factory.mktemp("corpus")
    lines = []
    for i in range(3):
        buf, words = broadcast(60.0, seed=i)
        write_wav(buf, root / f"train{i}.wav")
        write_transcript(words, root / f"train{i}.tsv")
        lines.append(f"train{i}.wav\ttrain{i}.tsv")
    (root / "manifest.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    buf, _ = broadcast(60.0, seed=42)
    write_wav(buf, root / "input.wav")
    return root


@pytest.fixture(scope="session")
def trained_model(corpus):
    from audiosum.cli import main

    path = corpus / "model.txt"
    assert main(["train", "--manifest", str(corpus / "manifest.tsv"), "--output", str(path)]) == 0
    return path
