import io

import numpy as np
import pytest

from casimirlab.errors import CalibrationError, ParseError, SegmentationError
from casimirlab.forcecurve import (CalibrationParams, ForceCurve,
                                   correct_separation_axis, load_scan,
                                   save_scan, segment_regions,
                                   separation_from_contact, signal_to_force)


def make_curve(n=20, observable="force_pn", voltage=0.31):
    piezo = np.linspace(0.0, 100.0, n)
    values = -np.linspace(1.0, 5.0, n)
    return ForceCurve("t", voltage, piezo, **{observable: values})


def test_curve_validation():
    piezo = np.linspace(0, 10, 12)
    with pytest.raises(ValueError, match="exactly one"):
        ForceCurve("t", 0.0, piezo, signal=piezo, force_pn=piezo)
    with pytest.raises(ValueError, match="exactly one"):
        ForceCurve("t", 0.0, piezo)
    with pytest.raises(ValueError, match="at least"):
        ForceCurve("t", 0.0, piezo[:5], force_pn=piezo[:5])
    with pytest.raises(ValueError, match="length"):
        ForceCurve("t", 0.0, piezo, force_pn=piezo[:-1])
    with pytest.raises(ValueError, match="increasing"):
        ForceCurve("t", 0.0, piezo[::-1], force_pn=piezo)


def test_save_load_round_trip():
    curve = ForceCurve("rt", 0.31, np.linspace(5.0, 400.0, 40),
                       force_pn=np.sin(np.arange(40)) * 100.0,
                       spring_constant=0.0169, temperature_k=300.0)
    buf = io.StringIO()
    save_scan(curve, buf)
    back = load_scan(io.StringIO(buf.getvalue()))
    assert back.scan_id == "rt"
    assert back.applied_voltage == pytest.approx(0.31, rel=1e-9)
    assert back.spring_constant == pytest.approx(0.0169, rel=1e-9)
    assert back.temperature_k == 300.0
    np.testing.assert_allclose(back.piezo_nm, curve.piezo_nm, rtol=1e-8)
    np.testing.assert_allclose(back.force_pn, curve.force_pn, rtol=1e-8)


@pytest.mark.parametrize("text,fragment", [
    ("piezo_nm,force_pn\n1,2\n", "missing metadata"),
    ("# scan_id=a\n# applied_voltage_v=0\n1,2\n", "unrecognized header"),
    ("# scan_id=a\n# applied_voltage_v=0\npiezo_nm,signal,force_pn\n",
     "ambiguous"),
    ("# scan_id=a\n# applied_voltage_v=0\npiezo_nm,signal\n1,x\n",
     "line 4"),
    ("# scan_id=a\n# applied_voltage_v=0\npiezo_nm,signal\n2,1\n1,1\n",
     "non-monotone"),
    ("# scan_id=a\n# applied_voltage_v=zz\npiezo_nm,signal\n1,1\n",
     "applied_voltage_v"),
    ("# scan_id=a\n# applied_voltage_v=0\n", "missing column header"),
])
def test_load_scan_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        load_scan(io.StringIO(text))


def test_signal_to_force_hooke():
    cal = CalibrationParams(k=0.0169, deflection_sensitivity=2.0)
    curve = make_curve(observable="signal")
    out = signal_to_force(curve, cal)
    # F_pn = k [N/m] * deflection [nm] * 1e3, attraction stays negative
    np.testing.assert_allclose(out.force_pn, curve.signal * 2.0 * 0.0169 * 1e3)
    assert np.all(out.force_pn < 0)
    assert out.spring_constant == 0.0169
    with pytest.raises(CalibrationError):
        signal_to_force(out, cal)
    # pN -> N -> pN round trip
    np.testing.assert_allclose(out.force_pn * 1e-12 * 1e12, out.force_pn,
                               rtol=1e-12)


def test_correct_separation_axis():
    cal = CalibrationParams(k=0.0169)
    curve = make_curve()
    out = correct_separation_axis(curve, cal)
    np.testing.assert_allclose(out.piezo_nm,
                               curve.piezo_nm + curve.force_pn / (0.0169 * 1e3))
    # idempotent under identity corrections (negligible deflection)
    stiff = CalibrationParams(k=1e9)
    once = correct_separation_axis(curve, stiff)
    twice = correct_separation_axis(once, stiff)
    np.testing.assert_allclose(twice.piezo_nm, curve.piezo_nm,
                               rtol=1e-12, atol=1e-11)
    with pytest.raises(CalibrationError):
        correct_separation_axis(make_curve(observable="signal"), cal)


def test_hysteresis_monotonicity_guard():
    cal = CalibrationParams(k=0.0169, hysteresis_poly=(1.0, -0.01))
    with pytest.raises(CalibrationError, match="non-monotone"):
        correct_separation_axis(make_curve(), cal)


def test_calibration_params_validation():
    with pytest.raises(ValueError):
        CalibrationParams(k=0.0)
    with pytest.raises(ValueError):
        CalibrationParams(deflection_sensitivity=0.0)
    with pytest.raises(ValueError):
        CalibrationParams(hysteresis_poly=())
    # hysteresis map fixes the constant term at zero
    cal = CalibrationParams(hysteresis_poly=(1.0, 1e-5))
    assert cal.hysteresis_map(0.0) == 0.0


def contact_scan(contact_at=600.0, n=200, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    piezo = np.linspace(0.0, 650.0, n)
    baseline = -0.5 - 0.001 * piezo
    force = baseline.copy()
    flex = piezo >= contact_at
    force[flex] = baseline[flex] + 50.0 * (piezo[flex] - contact_at)
    force += rng.normal(0.0, noise, n)
    return ForceCurve("seg", 0.0, piezo, force_pn=force)


def test_segment_regions_partition():
    curve = contact_scan()
    bounds = segment_regions(curve)
    n = curve.piezo_nm.size
    covered = list(bounds.region3) + list(bounds.region2) + list(bounds.region1)
    assert covered == list(range(n))
    assert abs(bounds.contact_displacement_nm - 600.0) < 10.0
    sep = separation_from_contact(curve, bounds)
    assert sep[0] == pytest.approx(bounds.contact_displacement_nm)
    # region boundaries respect the 16 / 516 nm separation fences
    if len(bounds.region2):
        assert sep[bounds.region2.start] <= 516.0
        assert sep[bounds.region2.stop - 1] > 16.0


def test_segment_regions_requires_contact():
    piezo = np.linspace(0.0, 100.0, 50)
    flat = ForceCurve("flat", 0.0, piezo, force_pn=np.full(50, -1.0))
    with pytest.raises(SegmentationError):
        segment_regions(flat)
    with pytest.raises(SegmentationError):
        segment_regions(ForceCurve("sig", 0.0, piezo, signal=np.ones(50)))
