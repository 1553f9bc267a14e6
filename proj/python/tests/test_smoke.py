import math

import numpy as np
import pytest

import lsmvos


def unit_features(rng, c, h, w):
    x = rng.standard_normal((c, h, w)).astype(np.float32)
    return x / np.linalg.norm(x, axis=0, keepdims=True)


def test_conv2d_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 6, 7)).astype(np.float32)
    k = rng.standard_normal((4, 3, 3, 3)).astype(np.float32)
    b = rng.standard_normal(4).astype(np.float32)
    y = lsmvos.conv2d(x, k, b, stride=1, pad=1)
    assert y.shape == (4, 6, 7)
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    want = np.zeros_like(y)
    for i in range(6):
        for j in range(7):
            want[:, i, j] = np.tensordot(k, xp[:, i:i + 3, j:j + 3], axes=3) + b
    np.testing.assert_allclose(y, want, atol=1e-5)


def test_bilinear_and_topk():
    row = lsmvos.bilinear_resize(np.array([[[1.0, 3.0]]], np.float32), 2)
    np.testing.assert_allclose(row[0, 0], [1.0, 1.5, 2.5, 3.0])
    top = lsmvos.topk_per_position(np.array([3, 1, 2], np.float32).reshape(3, 1, 1), 2)
    assert top.ravel().tolist() == [3.0, 2.0]
    v = lsmvos.l2_normalize_channels(np.array([3, 4], np.float32).reshape(2, 1, 1))
    np.testing.assert_allclose(v.ravel(), [0.6, 0.8], rtol=1e-6)


def test_focal_loss_cross_entropy_case():
    loss, grad = lsmvos.focal_loss(np.full((1, 1, 1), 0.5, np.float32), np.ones((1, 1, 1), np.float32), 0.0, 0.5)
    assert math.isclose(loss, 0.5 * math.log(2), rel_tol=1e-6)
    assert grad.shape == (1, 1, 1)


def test_matching_roundtrip_and_backward():
    rng = np.random.default_rng(1)
    cur, prev = unit_features(rng, 8, 6, 6), unit_features(rng, 8, 6, 6)
    gate = rng.random((6, 6)).astype(np.float32)
    sim, src = lsmvos.short_term_match(cur, prev, gate, k=1, n=5)
    assert sim.shape == (5, 6, 6) and src.shape == (5, 6, 6)
    assert np.all(np.diff(sim, axis=0) <= 0)
    gcur, gprev = lsmvos.short_term_match_backward(np.zeros_like(sim), cur, prev, gate, sim, src)
    assert not gcur.any() and not gprev.any()

    ones = np.ones((6, 6), np.float32)
    s_sim, s_src = lsmvos.short_term_match(cur, prev, ones, k=6, n=40)
    l_sim, l_src = lsmvos.long_term_match(cur, prev, ones, n=40)
    assert np.array_equal(s_sim, l_sim) and np.array_equal(s_src, l_src)
    gcur, gref = lsmvos.long_term_match_backward(np.ones_like(l_sim), cur, prev, ones, l_sim, l_src)
    assert gcur.shape == cur.shape and gref.shape == prev.shape

    with pytest.raises(ValueError):
        lsmvos.short_term_match(cur, prev, np.full((6, 6), 2.0, np.float32))
    with pytest.raises(ValueError):
        lsmvos.long_term_match(cur, unit_features(rng, 4, 6, 6), ones)


def test_metrics():
    a = np.zeros((30, 30), np.uint8)
    a[5:15, 5:15] = 1
    b = np.zeros_like(a)
    b[5:15, 10:20] = 1
    assert math.isclose(lsmvos.region_similarity(a, b), 1 / 3)
    shifted = np.roll(a, 1, axis=1)
    assert lsmvos.contour_accuracy(a, shifted, 2) == 1.0
    mean, recall, decay = lsmvos.sequence_stats([0.9, 0.8, 0.7, 0.6])
    assert math.isclose(mean, 0.75) and recall == 1.0 and math.isclose(decay, 0.3)


def test_weights_and_sequence(tmp_path):
    w = lsmvos.seeded_init(4, 16)
    assert w == lsmvos.seeded_init(4, 16)
    assert "dec.fuse.weight" in w
    assert w.get("dec.fuse.weight").shape == (128, 4 * 16 + 129, 1, 1)
    path = tmp_path / "w.lsmw"
    lsmvos.save_weights(w, path)
    assert lsmvos.load_weights(path) == w
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(OSError):
        lsmvos.load_weights(path)

    model = lsmvos.Model(w)
    frames, labels = lsmvos.synthetic_clip(64, 48, 2, 3, seed=2)
    out, counters = lsmvos.run_sequence(frames, labels[0], model, k=3, n=16)
    assert len(out) == 3
    assert np.array_equal(out[0], labels[0])
    assert all(o.shape == (48, 64) and set(np.unique(o)) <= {0, 1, 2} for o in out)
    assert counters["shared_invocations"] == counters["frames"] == 3
    again, _ = lsmvos.run_sequence(frames, labels[0], model, k=3, n=16)
    assert all(np.array_equal(x, y) for x, y in zip(out, again))
    with pytest.raises(ValueError):
        lsmvos.run_sequence(frames, labels[0], model, k=3, n=16, use_long=False, use_short=False,
                            use_prev_mask=False)


def test_label_map_io(tmp_path):
    labels = np.arange(48, dtype=np.uint8).reshape(6, 8)
    lsmvos.write_label_map(tmp_path / "m.png", labels)
    assert np.array_equal(lsmvos.read_label_map(tmp_path / "m.png"), labels)
    probs = [np.full((6, 8), 0.7, np.float32), np.full((6, 8), 0.7, np.float32)]
    assert (lsmvos.merge_objects(probs, [3, 5]) == 3).all()
