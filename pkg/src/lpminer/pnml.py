"""PNML reading and writing for accepting Petri nets.

Invisible transitions follow the ProM convention: a ``toolspecific``
element with ``activity="$invisible$"``. A transition without a name is
also read as invisible. Final markings live in a ``finalmarkings`` element
under ``net``; one ``marking`` per final marking. Arcs must have weight 1.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path
from typing import IO

from .errors import PetriNetError
from .petri import AcceptingPetriNet, Marking, PetriNet, Transition

PTNET_TYPE = "http://www.pnml.org/version-2009/grammar/ptnet"
INVISIBLE = "$invisible$"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el: ET.Element, name: str) -> list[ET.Element]:
    return [c for c in el if _local(c.tag) == name]


def _text(el: ET.Element | None) -> str | None:
    if el is None:
        return None
    for c in el:
        if _local(c.tag) == "text":
            return (c.text or "").strip()
    return None


def _name(el: ET.Element) -> str | None:
    names = _children(el, "name")
    return _text(names[0]) if names else None


def _elements(net: ET.Element, kind: str) -> list[ET.Element]:
    """Elements of ``kind`` directly under the net or inside (nested) pages."""
    out = []
    stack = [net]
    while stack:
        el = stack.pop(0)
        for c in el:
            tag = _local(c.tag)
            if tag == kind:
                out.append(c)
            elif tag == "page":
                stack.append(c)
    return out


def _count(el: ET.Element, where: str) -> int:
    txt = _text(el)
    try:
        n = int(txt) if txt not in (None, "") else 1
    except ValueError:
        raise PetriNetError(f"{where}: token count {txt!r} is not an integer") from None
    if n < 0:
        raise PetriNetError(f"{where}: negative token count")
    return n


def read_pnml(source: str | Path | IO) -> AcceptingPetriNet:
    """Parse the first net of a PNML document."""
    where = str(source) if isinstance(source, (str, Path)) else "<stream>"
    try:
        root = ET.parse(source).getroot()
    except (ET.ParseError, OSError) as exc:
        raise PetriNetError(f"{where}: cannot read PNML: {exc}") from None
    nets = [el for el in root.iter() if _local(el.tag) == "net"]
    if not nets:
        raise PetriNetError(f"{where}: no <net> element")
    net_el = nets[0]
    places, initial = [], {}
    for p in _elements(net_el, "place"):
        pid = p.get("id")
        if not pid:
            raise PetriNetError(f"{where}: place without id")
        places.append(pid)
        for im in _children(p, "initialMarking"):
            n = _count(im, f"{where}: place {pid}")
            if n:
                initial[pid] = n
    transitions = []
    for t in _elements(net_el, "transition"):
        tid = t.get("id")
        if not tid:
            raise PetriNetError(f"{where}: transition without id")
        invisible = any(ts.get("activity") == INVISIBLE for ts in _children(t, "toolspecific"))
        label = None if invisible else (_name(t) or None)
        transitions.append(Transition(tid, label))
    arcs = []
    for a in _elements(net_el, "arc"):
        src, dst = a.get("source"), a.get("target")
        if not src or not dst:
            raise PetriNetError(f"{where}: arc {a.get('id')!r} lacks source or target")
        for ins in _children(a, "inscription"):
            if _count(ins, f"{where}: arc {a.get('id')}") != 1:
                raise PetriNetError(f"{where}: arc {a.get('id')!r} has weight other than 1")
        arcs.append((src, dst))
    finals = []
    holders = _children(net_el, "finalmarkings") or _children(root, "finalmarkings")
    for fm in holders:
        for m in _children(fm, "marking"):
            tokens = {}
            for p in _children(m, "place"):
                ref = p.get("idref")
                n = _count(p, f"{where}: final marking place {ref}")
                if n:
                    tokens[ref] = n
            finals.append(Marking(tokens))
    if not finals:
        raise PetriNetError(f"{where}: no final markings (expected <finalmarkings> under <net>)")
    try:
        return AcceptingPetriNet(PetriNet(places, transitions, arcs), Marking(initial), finals)
    except PetriNetError as exc:
        raise PetriNetError(f"{where}: {exc}") from None


def _add_text(parent: ET.Element, tag: str, text: str) -> ET.Element:
    el = ET.SubElement(parent, tag)
    ET.SubElement(el, "text").text = text
    return el


def pnml_string(apn: AcceptingPetriNet, *, net_id: str = "net1", name: str = "") -> str:
    net = apn.net
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", id=net_id, type=PTNET_TYPE)
    _add_text(net_el, "name", name or net_id)
    page = ET.SubElement(net_el, "page", id="page1")
    for p in net.places:
        pe = ET.SubElement(page, "place", id=p)
        _add_text(pe, "name", p)
        if apn.initial[p]:
            _add_text(pe, "initialMarking", str(apn.initial[p]))
    for tid in sorted(net.transitions):
        t = net.transitions[tid]
        te = ET.SubElement(page, "transition", id=tid)
        _add_text(te, "name", tid if t.label is None else t.label)
        if t.label is None:
            ET.SubElement(te, "toolspecific", tool="ProM", version="6.4", activity=INVISIBLE, localNodeID=tid)
    for k, (src, dst) in enumerate(sorted(net.arcs)):
        ET.SubElement(page, "arc", id=f"a{k}", source=src, target=dst)
    fms = ET.SubElement(net_el, "finalmarkings")
    for f in apn.finals:
        me = ET.SubElement(fms, "marking")
        for p in net.places:
            _add_text(me, "place", str(f[p])).set("idref", p)
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_pnml(apn: AcceptingPetriNet, dest: str | Path | IO[str], **kw) -> None:
    text = pnml_string(apn, **kw)
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


__all__ = ["read_pnml", "write_pnml", "pnml_string"]
