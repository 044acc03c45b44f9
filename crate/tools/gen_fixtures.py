#!/usr/bin/env python3
"""Build the offline fixture corpus under fixtures/.

The corpus mirrors the CSV projection served by the decay-data endpoint
(decay_rads / levels / gammas) for every nuclide reachable from the demo
progenitors. Values are taken from the ENSDF decay datasets redistributed in
the `paceENSDF` Python package (JSON conversions of the ENSDF decay files):

    pip download paceENSDF --no-deps -d /tmp/pd
    python3 -c "import zipfile; zipfile.ZipFile('/tmp/pd/paceENSDF-0.6.3-py3-none-any.whl').extractall('/tmp/pd/pace')"
    python3 tools/gen_fixtures.py /tmp/pd/pace/paceENSDF fixtures

Keys with no data get no file and are listed in absent_registry.txt; the mock
server answers those with an empty body, which the client treats as an
authoritative "no such dataset".

paceENSDF ships no isomeric-transition datasets, so the IT branches needed by
the demo chains are added from SUPPLEMENT_IT below.
"""
import json
import os
import re
import sys

ROOTS = ["U238", "U235", "Th232", "Np237", "Ac225", "K40", "Mo99", "Lu177", "Pb208"]

ELEMENTS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn "
    "Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce "
    "Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn "
    "Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl "
    "Mc Lv Ts Og"
).split()

# Isomeric transitions: (nuclide, isomer level keV) -> IT branching %, gamma rows
# (energy, start level, end level, absolute intensity % or None), connector
# transitions added to the level scheme (start, end).
SUPPLEMENT_IT = {
    ("Tc99", 142.6836): {
        "branching": 99.9963,
        "gammas": [
            (2.1726, 142.6836, 140.511, None),
            (140.511, 140.511, 0.0, 89.0),
            (142.63, 142.6836, 0.0, 0.0187),
        ],
        "connectors": [],
    },
    ("Pa234", 73.92): {"branching": 0.16, "gammas": [], "connectors": []},
    # The IT cascade of the 970 keV isomer is not part of the decay datasets;
    # a single effective connector links the isomer to the ground state.
    ("Lu177", 970.1757): {"branching": 22.7, "gammas": [], "connectors": [(970.1757, 0.0)]},
}

# Isomer ordinals as labelled by the data source where they differ from a
# plain count of long-lived levels in this abridged corpus.
ISOMER_LABELS = {("Lu177", 970.1757): "m4"}

ISOMER_MIN_HALF_LIFE_S = 1e-9

MODE_CODES = {
    "alphaDecay": "A",
    "betaMinusDecay": "B-",
    "electronCaptureBetaPlusDecay": "EC",
}

DR_HEADER = (
    "energy,unc_en,intensity,unc_i,start_level_energy,end_level_energy,shell,"
    "p_z,p_n,p_symbol,p_energy,p_energy_shift,p_half_life_sec,p_unc_hls,"
    "p_decay,p_decay_%,p_unc_d,d_z,d_n,d_symbol,d_energy"
)
LV_HEADER = (
    "z,n,symbol,energy,unc_e,energy_shift,jp,half_life_sec,unc_hls,isomer,"
    "decay_1,decay_1_%,unc_1,decay_2,decay_2_%,unc_2,decay_3,decay_3_%,unc_3"
)
TR_HEADER = "z,n,symbol,start_level_energy,end_level_energy,energy,unc_en,relative_intensity,unc_ri"


def split_id(nid):
    m = re.match(r"([A-Za-z]+)(\d+)$", nid)
    return m.group(1), int(m.group(2))


def z_of(sym):
    return ELEMENTS.index(sym) + 1


def key_stem(nid):
    sym, a = split_id(nid)
    return f"{a}{sym.lower()}"


def level_value(raw):
    """Numeric level energy and the offset symbol (e.g. '73.92+X')."""
    if isinstance(raw, (int, float)):
        return float(raw), ""
    m = re.match(r"\s*([0-9.]+)\s*(?:\+\s*([A-Za-z]+))?", str(raw))
    if m is None:
        return 0.0, str(raw).strip()
    return float(m.group(1)), (m.group(2) or "")


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if x == 0:
        return "0"
    r = f"{float(x):.10g}"
    if "e" in r:
        return f"{float(x):.6g}"
    return r


def present(x):
    return x is not None and x != 0


def jp_string(spins):
    if not spins:
        return ""
    s = spins[0]
    spin = s.get("spinReal")
    if spin is None:
        return ""
    if abs(spin - round(spin)) > 1e-6:
        txt = f"{int(round(spin * 2))}/2"
    else:
        txt = str(int(round(spin)))
    sign = s.get("paritySign")
    par = "+" if sign == "positive" else "-" if sign == "negative" else ""
    tentative = s.get("spinIsTentative") or s.get("parityIsTentative")
    return f"({txt}{par})" if tentative else f"{txt}{par}"


class Corpus:
    def __init__(self, pace):
        self.pace = pace
        self.by_parent = {}
        self.by_daughter = {}
        jdir = os.path.join(pace, "ENSDF_JSON")
        for f in sorted(os.listdir(jdir)):
            m = re.match(r"j_input_([A-Za-z]+\d+)_([A-Za-z]+\d+)_\d+_\d+_(.*)keV\.json", f)
            if not m:
                continue
            entry = (m.group(1), m.group(2), os.path.join(jdir, f))
            self.by_parent.setdefault(m.group(1), []).append(entry)
            self.by_daughter.setdefault(m.group(2), []).append(entry)
        self._cache = {}
        self.gx = {}
        self.binding = {}
        gdir = os.path.join(pace, "PACE_JSON")
        for f in sorted(os.listdir(gdir)):
            if not f.startswith("j_gx_"):
                continue
            d = json.load(open(os.path.join(gdir, f)))
            k = (d["parentID"], d["daughterID"], round(level_value(d["parentDecayLevelEnergy"] or 0)[0], 1))
            self.gx.setdefault(k, d)
            for b in d.get("bindingEnergies") or []:
                self.binding.setdefault(b["atomicNumber"], b)

    def load(self, path):
        if path not in self._cache:
            self._cache[path] = json.load(open(path))
        return self._cache[path]

    def reachable(self):
        seen, queue = [], list(ROOTS)
        while queue:
            x = queue.pop(0)
            if x in seen:
                continue
            seen.append(x)
            for _, d, _ in self.by_parent.get(x, []):
                if d not in seen:
                    queue.append(d)
        return seen


def norm_factors(d):
    n = d["decaySchemeNormalization"][0]["normalizationRecord"][0]
    pn = d["decaySchemeNormalization"][0]["productionNormalizationRecord"][0]
    br = n.get("multiplerBranchingRatio") if n.get("recordExistsBR") else None
    br = br if br else 1.0
    nr = n.get("multiplerPhotonIntensity") or 1.0
    nb = n.get("multiplerLeptonIntensity") or 1.0
    photon = pn.get("multiplierPhotonIntensityBranchingRatioCorrected")
    photon = photon if photon else nr * br
    return br, nb * br, photon


def parent_info(d):
    p = d["parentDecay"][0]
    e, shift = level_value(p["parentDecayLevelEnergy"] if p["parentDecayLevelEnergy"] is not None else 0)
    if not shift and isinstance(d.get("levelEnergyParentDecay"), str) and "X" in d["levelEnergyParentDecay"]:
        e, shift = level_value(d["levelEnergyParentDecay"].replace("pX", "+X"))
    hl = p["halfLife"][0] if p.get("halfLife") else {}
    return {
        "energy": e,
        "unc": p.get("dParentDecayLevelEnergy") or 0.0,
        "shift": shift,
        "hl": hl.get("halfLifeConverted"),
        "dhl": hl.get("dHalfLifeConverted"),
        "jp": jp_string(p.get("spins")),
    }


def decay_rows(corpus, nid):
    """All decay radiation rows with `nid` as parent, keyed by rad code."""
    rows = {k: [] for k in ("a", "bm", "bp", "g", "e", "x")}
    psym, pa = split_id(nid)
    pz = z_of(psym)
    for _, dau, path in corpus.by_parent.get(nid, []):
        d = corpus.load(path)
        mode = MODE_CODES.get(d["decayMode"])
        if mode is None:
            continue
        dsym, da = split_id(dau)
        dz = z_of(dsym)
        p = parent_info(d)
        br, particle_mult, photon_mult = norm_factors(d)
        common_p = [pz, pa - pz, psym, fmt(p["energy"]), p["shift"], fmt(p["hl"]), fmt(p["dhl"]),
                    mode, fmt(round(br * 100, 10)), ""]
        common_d = [dz, da - dz, dsym]
        for lvl in d["levelScheme"]:
            le, _ = level_value(lvl["levelEnergy"])
            for a in lvl.get("alphaDecay") or []:
                if not a.get("alphaEnergy"):
                    continue
                i = a.get("alphaIntensity")
                rows["a"].append([fmt(a["alphaEnergy"]), fmt(a.get("dAlphaEnergy") or 0),
                                  fmt(i * particle_mult) if present(i) else "",
                                  fmt((a.get("dAlphaIntensity") or 0) * particle_mult) if present(i) else "",
                                  "", "", ""] + common_p + common_d + [fmt(le)])
            for b in lvl.get("betaMinusDecay") or []:
                e = b.get("averageBetaMinusEnergy")
                if not e:
                    continue
                i = b.get("betaMinusIntensity")
                rows["bm"].append([fmt(e), fmt(b.get("dAverageBetaMinusEnergy") or 0),
                                   fmt(i * particle_mult) if present(i) else "",
                                   fmt((b.get("dBetaMinusIntensity") or 0) * particle_mult) if present(i) else "",
                                   "", "", ""] + common_p + common_d + [fmt(le)])
            for b in lvl.get("betaPlusDecay") or []:
                e = b.get("averageBetaPlusEnergy")
                i = b.get("betaPlusIntensity")
                if e and present(i):
                    rows["bp"].append([fmt(e), fmt(b.get("dAverageBetaPlusEnergy") or 0),
                                       fmt(i * particle_mult), fmt((b.get("dBetaPlusIntensity") or 0) * particle_mult),
                                       "", "", "B+"] + common_p + common_d + [fmt(le)])
                # Capture branches carry no particle but define the fed level.
                e = b.get("electronCaptureEnergy")
                i = b.get("electronCaptureIntensity")
                if e and present(i):
                    rows["bp"].append([fmt(e), fmt(b.get("dElectronCaptureEnergy") or 0),
                                       fmt(i * particle_mult), fmt((b.get("dElectronCaptureIntensity") or 0) * particle_mult),
                                       "", "", "EC"] + common_p + common_d + [fmt(le)])
            for g in lvl.get("gammaDecay") or []:
                ge = g.get("gammaEnergy")
                if not ge:
                    continue
                ri = g.get("gammaIntensity")
                start, _ = level_value(g["levelEnergyInitial"])
                end, _ = level_value(g["levelEnergyFinal"])
                absi = ri * photon_mult if present(ri) else None
                rows["g"].append([fmt(ge), fmt(g.get("dGammaEnergy") or 0),
                                  fmt(absi) if absi else "",
                                  fmt((g.get("dGammaIntensity") or 0) * photon_mult) if absi else "",
                                  fmt(start), fmt(end), ""] + common_p + common_d + [fmt(start)])
                if absi:
                    shells = (g.get("calculatedAtomicShellConversionCoefficients") or [{}])[0]
                    bind = corpus.binding.get(dz)
                    for shell, bkey in (("K", "KsubshellBindingEnergy"), ("L", "L1subshellBindingEnergy")):
                        alpha = shells.get(f"calculatedInternalConversionCoefficientAtomicShell{shell}")
                        if not alpha or not bind or not bind.get(bkey) or ge <= bind[bkey]:
                            continue
                        rows["e"].append([fmt(round(ge - bind[bkey], 4)), "", fmt(absi * alpha), "",
                                          fmt(start), fmt(end), shell] + common_p + common_d + [fmt(start)])
        gx = corpus.gx.get((nid, dau, round(p["energy"], 1)))
        if gx:
            for proj in gx.get("totalProjectionXrays") or []:
                for line in ("Kalpha1", "Kalpha2", "Kalpha3", "Kbeta1", "Kbeta2", "Kbeta3"):
                    e, i = proj.get(f"energy{line}"), proj.get(f"intensity{line}")
                    if not e or not i:
                        continue
                    label = line.replace("alpha", "a").replace("beta", "b")
                    rows["x"].append([fmt(e), "", fmt(round(i, 8)), fmt(round(proj.get(f"dIntensity{line}") or 0, 8)),
                                      "", "", label] + common_p + common_d + [""])
    for (nuc, lvl), sup in SUPPLEMENT_IT.items():
        if nuc != nid:
            continue
        for ge, start, end, i in sup["gammas"]:
            rows["g"].append([fmt(ge), "", fmt(i), "", fmt(start), fmt(end), "",
                              pz, pa - pz, psym, fmt(lvl), "", "", "", "IT", fmt(sup["branching"]), "",
                              pz, pa - pz, psym, fmt(start)])
    return rows


def level_scheme(corpus, nid):
    sym, a = split_id(nid)
    z = z_of(sym)
    levels = {}
    trans = {}

    def level_slot(e, shift):
        k = round(e, 2)
        if k not in levels:
            levels[k] = {"energy": e, "unc": 0.0, "shift": shift, "jp": "", "hl": None, "dhl": None, "modes": []}
        return levels[k]

    for _, _, path in corpus.by_daughter.get(nid, []):
        d = corpus.load(path)
        for lvl in d["levelScheme"]:
            e, shift = level_value(lvl["levelEnergy"])
            slot = level_slot(e, shift)
            if not slot["jp"]:
                slot["jp"] = jp_string(lvl.get("spins"))
            slot["unc"] = slot["unc"] or (lvl.get("dLevelEnergy") or 0.0)
            hls = lvl.get("isomerDecay") or []
            if hls and slot["hl"] is None:
                slot["hl"] = hls[0].get("halfLifeConverted")
                slot["dhl"] = hls[0].get("dHalfLifeConverted")
            for g in lvl.get("gammaDecay") or []:
                if not g.get("gammaEnergy"):
                    continue
                s, _ = level_value(g["levelEnergyInitial"])
                t, _ = level_value(g["levelEnergyFinal"])
                tk = (round(s, 2), round(t, 2))
                if tk not in trans:
                    trans[tk] = [s, t, g["gammaEnergy"], g.get("dGammaEnergy") or 0, g.get("gammaIntensity"),
                                 g.get("dGammaIntensity")]
    for _, _, path in corpus.by_parent.get(nid, []):
        d = corpus.load(path)
        mode = MODE_CODES.get(d["decayMode"])
        if mode is None:
            continue
        p = parent_info(d)
        slot = level_slot(p["energy"], p["shift"])
        slot["hl"] = p["hl"] if p["hl"] is not None else slot["hl"]
        slot["dhl"] = p["dhl"] if p["dhl"] is not None else slot["dhl"]
        slot["jp"] = slot["jp"] or p["jp"]
        slot["unc"] = slot["unc"] or p["unc"]
        br, _, _ = norm_factors(d)
        slot["modes"].append((mode, round(br * 100, 10)))
    for (nuc, lvl), sup in SUPPLEMENT_IT.items():
        if nuc != nid:
            continue
        slot = level_slot(lvl, "")
        slot["modes"].append(("IT", sup["branching"]))
        for s, t in sup["connectors"]:
            level_slot(t, "")
            trans.setdefault((round(s, 2), round(t, 2)), [s, t, round(s - t, 4), 0, None, None])
    if levels:
        level_slot(0.0, "")
    ordered = sorted(levels.values(), key=lambda l: l["energy"])
    count = 0
    for lv in ordered:
        label = ISOMER_LABELS.get((nid, lv["energy"]))
        if label is None and lv["energy"] > 0 and lv["hl"] and lv["hl"] >= ISOMER_MIN_HALF_LIFE_S:
            count += 1
            label = "m1" if count == 1 else f"m{count}"
        lv["isomer"] = label or ""
    lv_rows = []
    for lv in ordered:
        modes = sorted(lv["modes"], key=lambda m: -m[1])[:3]
        cells = []
        for i in range(3):
            if i < len(modes):
                cells += [modes[i][0], fmt(modes[i][1]), ""]
            else:
                cells += ["", "", ""]
        lv_rows.append([z, a - z, sym, fmt(lv["energy"]), fmt(lv["unc"]), lv["shift"], lv["jp"],
                        fmt(lv["hl"]), fmt(lv["dhl"]), lv["isomer"]] + cells)
    tr_rows = []
    for (_, _), t in sorted(trans.items(), key=lambda kv: (-kv[0][0], -kv[0][1])):
        tr_rows.append([z, a - z, sym, fmt(t[0]), fmt(t[1]), fmt(t[2]), fmt(t[3]),
                        fmt(t[4]) if present(t[4]) else "", fmt(t[5]) if present(t[4]) else ""])
    return lv_rows, tr_rows


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join(str(c) for c in r) + "\n")


def main():
    pace, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    corpus = Corpus(pace)
    nuclides = corpus.reachable()
    written = 0
    for nid in nuclides:
        stem = key_stem(nid)
        rows = decay_rows(corpus, nid)
        for code, rs in rows.items():
            if rs:
                write_csv(os.path.join(out, f"{stem}_dr-{code}.csv"), DR_HEADER, rs)
                written += 1
        lv, tr = level_scheme(corpus, nid)
        if lv:
            write_csv(os.path.join(out, f"{stem}_lv.csv"), LV_HEADER, lv)
            written += 1
        if tr:
            write_csv(os.path.join(out, f"{stem}_tr.csv"), TR_HEADER, tr)
            written += 1
    # Keys without data, so the directory doubles as a fully primed cache.
    absent = []
    for nid in nuclides:
        stem = key_stem(nid)
        for code in ("dr-a", "dr-bm", "dr-bp", "dr-g", "dr-e", "dr-x", "lv", "tr"):
            if not os.path.exists(os.path.join(out, f"{stem}_{code}.csv")):
                absent.append(f"{stem}:{code}")
    with open(os.path.join(out, "absent_registry.txt"), "w", newline="\n") as fh:
        fh.write("".join(k + "\n" for k in sorted(set(absent))))
    print(f"{len(nuclides)} nuclides, {written} files, {len(absent)} absent keys")


if __name__ == "__main__":
    main()
