import json

import pytest

from branchangle.angles import BranchAngle, vector_angle
from branchangle.annostore import (AngleAnnotation, AnnotationFile,
                                   AnnotationFormatError,
                                   AnnotationValidationError,
                                   detections_to_annotations, load_corpus,
                                   parse_annotations, read_annotations,
                                   validate, write_annotations)


def make_file(image_id="im01", dims=(100, 100)):
    return AnnotationFile(
        image_id=image_id, image_dims=dims,
        annotations=[AngleAnnotation.from_points((30, 20), (40, 30), (50, 20)),
                     AngleAnnotation.from_points((10, 10), (20, 20), (10, 30))])


def test_roundtrip(tmp_path):
    path = tmp_path / "im01.json"
    original = make_file()
    write_annotations(original, path)
    back = read_annotations(path)
    assert back.image_id == "im01"
    assert back.image_dims == (100, 100)
    assert len(back.annotations) == 2
    for orig, got in zip(original.annotations, back.annotations):
        assert tuple(got.a) == tuple(orig.a)
        assert tuple(got.b) == tuple(orig.b)
        assert tuple(got.c) == tuple(orig.c)
        assert got.angle_deg == pytest.approx(orig.angle_deg)


def test_written_document_shape(tmp_path):
    path = tmp_path / "a.json"
    write_annotations(make_file(), path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"image_id", "width", "height", "schema_version",
                        "annotations"}
    assert doc["schema_version"] == 1
    rec = doc["annotations"][0]
    assert set(rec) == {"a", "b", "c", "angle_deg"}


def test_validate_catches_out_of_bounds():
    f = make_file(dims=(35, 35))
    problems = validate(f)
    assert problems
    assert any("outside" in p for p in problems)


def test_validate_catches_coincident_points():
    f = AnnotationFile(image_id="x", image_dims=(50, 50),
                       annotations=[AngleAnnotation(a=(5, 5), b=(5, 5),
                                                    c=(9, 9), angle_deg=0.0)])
    assert any("coincides" in p for p in validate(f))


def test_validate_catches_inconsistent_angle():
    good = vector_angle((40, 30), (30, 20), (50, 20))
    f = AnnotationFile(image_id="x", image_dims=(100, 100),
                       annotations=[AngleAnnotation(a=(30, 20), b=(40, 30),
                                                    c=(50, 20),
                                                    angle_deg=good + 1.0)])
    assert any("recomputes" in p for p in validate(f))
    # within tolerance passes
    f.annotations[0].angle_deg = good + 0.005
    assert validate(f) == []


def test_write_refuses_invalid(tmp_path):
    f = make_file(dims=(35, 35))
    with pytest.raises(AnnotationValidationError):
        write_annotations(f, tmp_path / "bad.json")
    assert not (tmp_path / "bad.json").exists()
    assert not list(tmp_path.glob("*.tmp"))


def test_parse_requires_keys():
    with pytest.raises(AnnotationFormatError):
        parse_annotations({"image_id": "x", "width": 10, "height": 10})


def test_parse_legacy_flat_points():
    theta = vector_angle((20, 20), (10, 10), (30, 10))
    doc = {"image_id": "x", "width": 50, "height": 50, "schema_version": 1,
           "annotations": [{"points": [10, 10, 20, 20, 30, 10],
                            "angle_deg": theta}]}
    f = parse_annotations(doc)
    assert tuple(f.annotations[0].b) == (20, 20)
    assert f.annotations[0].angle_deg == pytest.approx(theta)


def test_parse_fills_missing_angle():
    doc = {"image_id": "x", "width": 50, "height": 50, "schema_version": 1,
           "annotations": [{"a": [10, 10], "b": [20, 20], "c": [30, 10],
                            "angle_deg": None}]}
    f = parse_annotations(doc)
    assert f.annotations[0].angle_deg == pytest.approx(
        vector_angle((20, 20), (10, 10), (30, 10)))


def test_read_rejects_garbage(tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    with pytest.raises(AnnotationFormatError):
        read_annotations(p)
    p.write_text("[1, 2, 3]")
    with pytest.raises(AnnotationFormatError):
        read_annotations(p)


def test_detections_to_annotations():
    theta = vector_angle((10, 10), (18, 10), (10, 18))
    det = [BranchAngle(bifurcation=(10, 10), anchor_a=(18, 10),
                       anchor_c=(10, 18), theta_deg=theta)]
    f = detections_to_annotations(det, "im07", (64, 64))
    assert f.image_id == "im07"
    ann = f.annotations[0]
    assert tuple(ann.b) == (10, 10)
    assert ann.angle_deg == pytest.approx(90.0)
    assert validate(f) == []


def test_load_corpus_pairing(demo_corpus):
    entries, warnings = load_corpus(demo_corpus / "images",
                                    demo_corpus / "annotations",
                                    demo_corpus / "masks")
    assert [e.image_id for e in entries] == ["im01", "im02"]
    assert warnings == []
    assert entries[0].mask_path is not None
    f = entries[0].load_annotations()
    assert f.image_id == "im01"
    img = entries[0].load_image()
    assert img.shape[2] == 3


def test_load_corpus_reports_orphans(demo_corpus, tmp_path):
    (demo_corpus / "images" / "im03.png").write_bytes(
        (demo_corpus / "images" / "im01.png").read_bytes())
    entries, warnings = load_corpus(demo_corpus / "images",
                                    demo_corpus / "annotations")
    assert len(entries) == 2
    assert any("im03" in w for w in warnings)


def test_load_corpus_empty_raises(tmp_path):
    (tmp_path / "images").mkdir()
    (tmp_path / "annotations").mkdir()
    with pytest.raises(ValueError):
        load_corpus(tmp_path / "images", tmp_path / "annotations")
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "nope", tmp_path / "annotations")
