"""Reference rendering in the fixed plain style:
{author}. {title}. {journal|booktitle}{, volume({number})}{:pages}{, publisher}{, year}.
"""

from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from gallery.core import Reference, render_reference


def ref(**attrs) -> Reference:
    return Reference(ref_key="x1", entry_type="article", attributes=tuple(attrs.items()))


def test_schramm_article():
    # [DERIVED] hand-applied template
    r = ref(
        author="O. Schramm",
        title="Circle patterns with the combinatorics of the square grid",
        journal="Duke Math. J.",
        year="1997",
    )
    assert render_reference(r) == (
        "O. Schramm. Circle patterns with the combinatorics of the square grid. Duke Math. J., 1997."
    )


def test_no_attributes_renders_key():
    assert render_reference(Reference(ref_key="x1", entry_type="misc")) == "[x1]."


def test_title_and_year_only():
    # [DERIVED] hand-applied template
    assert render_reference(ref(title="T", year="2020")) == "T. 2020."


def test_full_article():
    r = ref(
        author="H. B. Lawson",
        title="Complete minimal surfaces in S3",
        journal="Ann. of Math.",
        volume="92",
        number="3",
        pages="335-374",
        year="1970",
    )
    assert render_reference(r) == (
        "H. B. Lawson. Complete minimal surfaces in S3. Ann. of Math., 92(3):335-374, 1970."
    )


def test_book_with_publisher():
    r = ref(author="A. I. Bobenko", title="Discrete Differential Geometry", publisher="Springer", year="2008")
    assert render_reference(r) == "A. I. Bobenko. Discrete Differential Geometry. Springer, 2008."


def test_booktitle_used_when_no_journal():
    r = ref(title="T", booktitle="Proc. Conf.", year="1999")
    assert render_reference(r) == "T. Proc. Conf., 1999."


def test_pages_without_venue():
    # pages attach with ":" only behind a venue/volume; alone they start the tail
    r = ref(title="T", pages="1-2")
    assert render_reference(r) == "T. 1-2."


def test_number_only_without_volume_is_skipped():
    r = ref(title="T", number="7", year="2001")
    assert render_reference(r) == "T. 2001."


def test_author_with_trailing_period_not_doubled():
    r = ref(author="J. Smith et al.", title="T")
    assert render_reference(r) == "J. Smith et al. T."


_FIELD = st.text(alphabet=st.characters(codec="ascii", exclude_characters=".\x00\n"), min_size=1, max_size=12).map(
    str.strip
).filter(bool)


@given(
    st.fixed_dictionaries(
        {},
        optional={
            k: _FIELD
            for k in ("author", "title", "journal", "booktitle", "volume", "number", "pages", "publisher", "year")
        },
    )
)
def test_terminal_period_and_determinism(attrs):
    r = ref(**attrs)
    out = render_reference(r)
    assert out.endswith(".")
    assert not out.endswith("..")
    assert render_reference(r) == out
    for k in ("author", "title", "year", "publisher"):
        if k in attrs:
            assert attrs[k] in out
