import json

import numpy as np
import pytest

import shapes2toon as s2t


def test_layout_round_trip_and_rasterize():
    layout = s2t.sample_layout(3)
    doc = json.loads(layout)
    assert len(doc["shapes"]) == 5
    img = s2t.rasterize(layout, 64)
    assert img.shape == (64, 64, 3)
    assert img.dtype == np.float32
    assert 0.0 <= img.min() < 0.5 < img.max() <= 1.0


def test_validation_error_carries_the_field_path():
    bad = '{"canvas":{"w":256,"h":256},"shapes":[{"kind":"oval","cx":5,"cy":5,"rx":-5,"ry":3}]}'
    with pytest.raises(ValueError, match=r"shapes\[0\]\.rx"):
        s2t.validate_layout(bad)
    with pytest.raises(s2t.ParseError):
        s2t.validate_layout("{oops")


def test_fit_recovers_the_rendered_layout():
    layout = json.loads(s2t.sample_layout(5))
    fitted = json.loads(s2t.fit_layout(s2t.render_toon(json.dumps(layout), 256)))
    for shape in layout["shapes"]:
        err = min(np.hypot(f["cx"] - shape["cx"], f["cy"] - shape["cy"]) for f in fitted["shapes"])
        assert err < 4.0


def test_frechet_distance_closed_form():
    mu1, mu2 = np.zeros(2), np.array([1.0, 0.0])
    s1, s2 = np.eye(2), np.diag([1.0, 4.0])
    assert s2t.frechet_distance(mu1, s1, mu2, s2) == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(s2t.NumericError):
        s2t.frechet_distance(mu1, np.diag([1.0, -1.0]), mu2, s1)


def test_train_and_infer_through_the_cli(tmp_path):
    base, aug, run = tmp_path / "base", tmp_path / "aug", tmp_path / "run"
    assert s2t.build_corpus(3, 1, str(base), 32) == 3
    assert s2t.expand_corpus(str(base), str(aug), 2, 1) == 6
    code = s2t.cli(["train", "--corpus", str(aug), "--out", str(run), "--epochs", "1", "--image-size", "32",
                    "--ng", "4", "--nd", "4", "--train-fraction", "0.6"])
    assert code == 0
    model = s2t.Model(str(run / "checkpoint"))
    assert model.image_size == 32
    assert len(model.id) > 0
    out = model.translate_layout(s2t.sample_layout(1), seed=2)
    assert out.shape == (32, 32, 3)
    assert np.array_equal(out, model.translate_layout(s2t.sample_layout(1), seed=2))
    with pytest.raises(s2t.IoError):
        s2t.Model(str(tmp_path / "missing"))
