import pytest

from triodeplots import FIGURE_KINDS, FigureSpec, MissingInputError, render
from triodeplots.cli import main


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_render_all_kinds(synth_run, tmp_path, kind):
    out = tmp_path / f"{kind}.png"
    res = render(FigureSpec(run_dir=synth_run, kind=kind, out_path=out))
    assert res == out
    assert out.exists() and out.stat().st_size > 1000


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_pixel_identical_rerun(synth_run, tmp_path, kind):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(FigureSpec(run_dir=synth_run, kind=kind, out_path=a))
    render(FigureSpec(run_dir=synth_run, kind=kind, out_path=b))
    assert a.read_bytes() == b.read_bytes()


def test_empty_run_dir_fails_without_partial_output(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = tmp_path / "fig.png"
    with pytest.raises(MissingInputError) as exc:
        render(FigureSpec(run_dir=empty, kind="bracket", out_path=out))
    assert "triode-lab run" in str(exc.value)
    assert not out.exists()


def test_unknown_kind_rejected(synth_run, tmp_path):
    with pytest.raises(ValueError):
        FigureSpec(run_dir=synth_run, kind="pie", out_path=tmp_path / "x.png")


def test_epsilon_selection(synth_run, tmp_path):
    out = tmp_path / "map.png"
    render(
        FigureSpec(run_dir=synth_run, kind="field-map", out_path=out, epsilon=0.2)
    )
    assert out.exists()
    with pytest.raises(MissingInputError):
        render(
            FigureSpec(
                run_dir=synth_run, kind="field-map", out_path=out, epsilon=0.07
            )
        )


def test_run_dir_is_read_only(synth_run, tmp_path):
    before = sorted(p.name for p in synth_run.iterdir())
    render(FigureSpec(run_dir=synth_run, kind="junction", out_path=tmp_path / "j.png"))
    after = sorted(p.name for p in synth_run.iterdir())
    assert before == after


def test_cli(synth_run, tmp_path, capsys):
    out = tmp_path / "cli.png"
    rc = main([str(synth_run), "--figure", "bracket", "--out", str(out)])
    assert rc == 0
    assert out.exists()
    rc = main([str(tmp_path / "nope"), "--figure", "bracket", "--out", str(out)])
    assert rc == 1
