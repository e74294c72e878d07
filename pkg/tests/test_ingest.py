import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threatgraph.errors import (
    BadKindError,
    DegenerateQuadError,
    MalformedLineError,
    OutOfBoundsError,
    WrongPointCountError,
)
from threatgraph.ingest import (
    DetectionRecord,
    FrameBundle,
    StreamConfig,
    bundles_from_records,
    parse_calibration,
    parse_detection_text,
    serialize_detection_text,
)

CONFIG = StreamConfig(frame_width=1920, frame_height=1080, fps=25)


def test_parse_single_person_line():
    bundles = parse_detection_text("7,person,100.0,200.0,0.4,50.0,0.93,,\n", CONFIG)
    assert len(bundles) == 1
    [bundle] = bundles
    assert bundle.frame == 7
    assert bundle.faces == [] and bundle.handshakes == []
    [rec] = bundle.persons
    assert rec == DetectionRecord(7, "person", 100.0, 200.0, 0.4, 50.0, 0.93, None, None)


def test_empty_file_gives_empty_list():
    assert parse_detection_text("", CONFIG) == []


def test_negative_u_is_out_of_bounds():
    with pytest.raises(OutOfBoundsError):
        parse_detection_text("0,person,-3,10,0.5,20,0.9,,\n", CONFIG)


def test_header_is_optional():
    text = "frame,kind,u,v,r,h,conf_a,conf_b,track_id\n0,person,5,5,0.5,2,1.0,,\n"
    assert len(parse_detection_text(text, CONFIG)) == 1


@pytest.mark.parametrize("line,exc", [
    ("0,person,5,5,0.5,2,1.0,,", None),
    ("0,giraffe,5,5,0.5,2,1.0,,", BadKindError),
    ("0,person,5,5,0.5,2,1.0,0.3,", MalformedLineError),  # conf_b on non-face
    ("0,face,5,5,0.5,2,1.0,,", MalformedLineError),       # face missing conf_b
    ("0,person,5,5,0.5,2,1.5,,", MalformedLineError),     # conf out of range
    ("0,person,5,5,-0.5,2,1.0,,", MalformedLineError),    # bad aspect
    ("0,person,5,5,0.5,0,1.0,,", MalformedLineError),     # zero height
    ("0,person,5,5,0.5,2,1.0,", MalformedLineError),      # 8 fields
    ("-1,person,5,5,0.5,2,1.0,,", MalformedLineError),    # negative frame
    ("0,person,5000,5,0.5,2,1.0,,", OutOfBoundsError),    # u >= W
    ("0,person,5,1080,0.5,2,1.0,,", OutOfBoundsError),    # v >= H
    ("0,person,abc,5,0.5,2,1.0,,", MalformedLineError),
])
def test_line_validation(line, exc):
    if exc is None:
        parse_detection_text(line + "\n", CONFIG)
    else:
        with pytest.raises(exc):
            parse_detection_text(line + "\n", CONFIG)


def test_error_carries_line_number():
    text = "0,person,5,5,0.5,2,1.0,,\n1,person,-1,5,0.5,2,1.0,,\n"
    with pytest.raises(OutOfBoundsError) as err:
        parse_detection_text(text, CONFIG)
    assert err.value.line_no == 2


def test_bundles_sorted_and_partitioned():
    text = (
        "3,person,5,5,0.5,2,1.0,,\n"
        "1,face,10,10,1.0,4,0.8,0.2,\n"
        "1,person,5,5,0.5,2,1.0,,\n"
        "3,handshake,20,20,1.5,6,0.7,,\n"
    )
    bundles = parse_detection_text(text, CONFIG)
    assert [b.frame for b in bundles] == [1, 3]
    assert len(bundles[0].persons) == 1 and len(bundles[0].faces) == 1
    assert len(bundles[1].persons) == 1 and len(bundles[1].handshakes) == 1
    frames = [b.frame for b in bundles]
    assert all(a < b for a, b in zip(frames, frames[1:]))


_coord = st.floats(min_value=0.0, max_value=1079.0, allow_nan=False, width=64)
_conf = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, width=64)


@st.composite
def _records(draw):
    kind = draw(st.sampled_from(["person", "face", "handshake"]))
    return DetectionRecord(
        frame=draw(st.integers(min_value=0, max_value=500)),
        kind=kind,
        u=draw(_coord),
        v=draw(_coord),
        r=draw(st.floats(min_value=0.01, max_value=10.0, allow_nan=False)),
        h=draw(st.floats(min_value=0.01, max_value=1000.0, allow_nan=False)),
        conf_a=draw(_conf),
        conf_b=draw(_conf) if kind == "face" else None,
        track_id=draw(st.one_of(st.none(), st.integers(min_value=0, max_value=99))),
    )


@settings(max_examples=200)
@given(st.lists(_records(), max_size=30))
def test_serialize_parse_round_trip(records):
    bundles = bundles_from_records(records)
    assert parse_detection_text(serialize_detection_text(bundles), CONFIG) == bundles


@settings(max_examples=200)
@given(st.lists(_records(), min_size=1, max_size=20))
def test_parsed_records_satisfy_invariants(records):
    text = serialize_detection_text(bundles_from_records(records))
    for bundle in parse_detection_text(text, CONFIG):
        for rec in bundle.records():
            assert rec.validate(CONFIG) is None
            assert rec.frame == bundle.frame


def test_calibration_round_trip(tmp_path):
    path = tmp_path / "calib.csv"
    path.write_text("0,0,0,0\n10,0,5,0\n10,10,5,5\n0,10,0,5\n")
    image_points, floor_points = parse_calibration(path)
    assert image_points == [(0, 0), (10, 0), (10, 10), (0, 10)]
    assert floor_points == [(0, 0), (5, 0), (5, 5), (0, 5)]


def test_calibration_wrong_point_count(tmp_path):
    path = tmp_path / "calib.csv"
    path.write_text("0,0,0,0\n10,0,5,0\n10,10,5,5\n")
    with pytest.raises(WrongPointCountError):
        parse_calibration(path)


def test_calibration_collinear_triple(tmp_path):
    path = tmp_path / "calib.csv"
    path.write_text("0,0,0,0\n1,1,1,0\n2,2,1,1\n0,5,0,1\n")
    with pytest.raises(DegenerateQuadError):
        parse_calibration(path)


def test_stream_config_invariants():
    with pytest.raises(Exception):
        StreamConfig(frame_width=0, frame_height=10, fps=25)
    with pytest.raises(Exception):
        StreamConfig(frame_width=10, frame_height=10, fps=0)
