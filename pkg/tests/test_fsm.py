import pytest

from codonsoup.analytics import EventKind
from codonsoup.fsm import (
    Neighbor,
    NeighborView,
    apply_splits,
    execute_split,
    run_state_machines,
    tick_timers,
    update_splitting,
    update_strand_location,
)
from codonsoup.model import CodonState, CodonType, FieldSize, FieldSlot, SplittingState, Vec2

X, Y, Z = SplittingState.X, SplittingState.Y, SplittingState.Z
LARGE_YELLOW = (FieldSize.SMALL,) * 3 + (FieldSize.LARGE,)


def codon(codon_id=0, sls=0, state=X, bond=(None, None, None), **kwargs):
    return CodonState(
        codon_id=codon_id,
        codon_type=CodonType.TYPE0,
        position=Vec2(0.0, 0.0),
        angle=0.0,
        bond=bond,
        strand_location_state=sls,
        splitting_state=state,
        **kwargs,
    )


def view(red=None, blue=None, vertical=None):
    def n(v, i):
        return None if v is None else Neighbor(i, v[0], v[1])

    return NeighborView(red=n(red, 1), blue=n(blue, 2), vertical=n(vertical, 3))


@pytest.mark.parametrize(
    "title,own,nv,want",
    [
        ("0 stays inside a strand", 0, view(red=(0, X), blue=(0, X), vertical=(0, X)), 0),
        ("0 at an end with a vertical partner", 0, view(red=(0, X), vertical=(0, X)), 1),
        ("0 without vertical partner", 0, view(red=(0, X)), 0),
        ("0 free", 0, view(), 0),
        ("1 waits for the partner", 1, view(blue=(0, X), vertical=(0, X)), 1),
        ("1 partner agrees with 1", 1, view(blue=(0, X), vertical=(1, X)), 2),
        ("1 partner agrees with 2", 1, view(blue=(0, X), vertical=(2, X)), 2),
        ("1 no longer at the end", 1, view(red=(0, X), blue=(0, X), vertical=(1, X)), 0),
        ("2 holds", 2, view(red=(0, X), vertical=(2, X)), 2),
        ("2 partner dropped to 0", 2, view(red=(0, X), vertical=(0, X)), 0),
        ("2 lost the vertical bond", 2, view(red=(0, X)), 0),
    ],
)
def test_update_strand_location(title, own, nv, want):
    assert update_strand_location(codon(sls=own), nv) == want, title


@pytest.mark.parametrize(
    "title,c,nv,want",
    [
        ("x starts the wave at the no-red end", codon(sls=2), view(blue=(0, X), vertical=(2, X)), Y),
        ("x waits for the partner's end", codon(sls=2), view(blue=(0, X), vertical=(1, X)), X),
        ("x follows a red y", codon(sls=0), view(red=(0, Y), blue=(0, X), vertical=(0, X)), Y),
        ("x blocked by a 1", codon(sls=1), view(red=(0, Y), vertical=(0, X)), X),
        ("x blocked by a vertical 1", codon(sls=0), view(red=(0, Y), blue=(0, X), vertical=(1, X)), X),
        ("x follows a red y without vertical", codon(sls=0), view(red=(0, Y), blue=(0, X)), Y),
        ("x with red x stays", codon(sls=0), view(red=(0, X), blue=(0, X), vertical=(0, X)), X),
        ("y turns at the no-blue end", codon(sls=2, state=Y), view(red=(0, Y), vertical=(2, X)), Z),
        ("y follows a blue z", codon(sls=0, state=Y), view(red=(0, Y), blue=(0, Z)), Z),
        ("y with blue y stays", codon(sls=0, state=Y), view(red=(0, Y), blue=(0, Y)), Y),
        ("z follows a red x", codon(sls=0, state=Z), view(red=(0, X), blue=(0, Z)), X),
        ("z at the end waits for its timer", codon(sls=0, state=Z, z_steps=999), view(blue=(0, Z)), Z),
        ("z at the end times out", codon(sls=0, state=Z, z_steps=1000), view(blue=(0, Z)), X),
        ("z with red z stays", codon(sls=0, state=Z, z_steps=5000), view(red=(0, Z)), Z),
    ],
)
def test_update_splitting(title, c, nv, want):
    assert update_splitting(c, nv, 1000) is want, title


def test_execute_split_releases_both_sides():
    c = codon(0, bond=(None, 1, 5), state=Z)
    partner = codon(5, bond=(None, None, 0))
    c2, partner2, event = execute_split(c, partner, step=42)
    assert c2.bond == (None, 1, None)
    assert partner2 is not None and partner2.bond == (None, None, None)
    assert c2.size(FieldSlot.YELLOW) is FieldSize.LARGE
    assert c2.yellow_steps_large == 0
    assert (event.step, event.kind, event.payload) == (42, EventKind.SPLIT_TRIGGERED, {"codon": 0, "released": 5})


def test_execute_split_without_partner():
    c2, partner2, event = execute_split(codon(0, state=Z), None, step=1)
    assert partner2 is None
    assert event.payload == {"codon": 0, "released": None}
    assert c2.size(FieldSlot.YELLOW) is FieldSize.LARGE


def test_state_machines_read_a_snapshot():
    # a two-codon strand 0 -red-> 1 bonded vertically to 3 -red-> 2
    codons = [
        codon(0, sls=0, bond=(1, None, 3)),
        codon(1, sls=0, bond=(None, 0, 2)),
        codon(2, sls=0, bond=(None, 3, 1)),
        codon(3, sls=0, bond=(2, None, 0)),
    ]
    out, entered = run_state_machines(codons, 1000)
    assert [c.strand_location_state for c in out] == [1, 1, 1, 1]
    assert [c.splitting_state for c in out] == [X, X, X, X]
    assert entered == []
    out, entered = run_state_machines(out, 1000)
    assert [c.strand_location_state for c in out] == [2, 2, 2, 2]
    # the ends without a red neighbour start the wave
    assert [c.splitting_state for c in out] == [X, Y, Y, X]
    out, entered = run_state_machines(out, 1000)
    assert [c.splitting_state for c in out] == [Y, Y, Y, Y]
    assert entered == []
    # the ends without a blue neighbour turn it back
    out, entered = run_state_machines(out, 1000)
    assert [c.splitting_state for c in out] == [Z, Y, Y, Z]
    assert entered == [0, 3]


def test_apply_splits_in_id_order():
    codons = [
        codon(0, bond=(None, None, 1), state=Z),
        codon(1, bond=(None, None, 0), state=Z),
    ]
    out, events = apply_splits(codons, [1, 0], step=7)
    assert [c.bond for c in out] == [(None, None, None), (None, None, None)]
    assert [e.payload for e in events] == [{"codon": 0, "released": 1}, {"codon": 1, "released": None}]
    assert all(c.size(FieldSlot.YELLOW) is FieldSize.LARGE for c in out)


@pytest.mark.parametrize(
    "title,c,want_yellow,want_z",
    [
        ("idle", codon(), 0, 0),
        ("large yellow counts", codon(field_size=LARGE_YELLOW, yellow_steps_large=3), 4, 0),
        ("small yellow resets", codon(yellow_steps_large=1000), 0, 0),
        ("z counts", codon(state=Z, z_steps=9), 0, 10),
        ("leaving z resets", codon(state=X, z_steps=9), 0, 0),
    ],
)
def test_tick_timers(title, c, want_yellow, want_z):
    got = tick_timers(c)
    assert (got.yellow_steps_large, got.z_steps) == (want_yellow, want_z), title
