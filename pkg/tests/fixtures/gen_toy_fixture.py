"""Generate toy_retrieval.jsonl, the 20-record end-to-end fixture.

Run from the repository root:  python3 tests/fixtures/gen_toy_fixture.py

Each record carries 5 ranked passages. The `e` flags below say which
passages are meant to contain an answer alias; the generator verifies every
flag against both the library matcher and the independent oracle before
writing, so the fixture cannot drift from its intent.

Layout: 14 records with 1-3 evidential passages, 3 with none (q17-q19), and
q20 whose evidential passage holds two aliases at once (corrupting it must
fail, exercising the skip-and-log fallback).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from oracles import oracle_contains  # noqa: E402

from ragnoise.normalize import contains_answer  # noqa: E402

# (question, aliases, [(evidential?, title, text), .. 5 passages ..])
RECORDS = [
    ("what is the capital of france", ["Paris"], [
        (True, "France", "France is a country in western Europe whose capital, Paris, sits on the Seine and hosts about a fifth of its urban population."),
        (False, "Bordeaux wine", "Bordeaux produces red wine from merlot and cabernet grapes grown along the Garonne estuary in the southwest."),
        (True, "Paris history", "Paris grew from a Roman settlement on an island and became the seat of French kings during the medieval period."),
        (False, "French rail", "High speed rail lines connect most large French cities, cutting travel times below those of short haul flights."),
        (False, "Alps", "Alpine villages rely on winter sports income and face shorter snow seasons as average temperatures climb."),
    ]),
    ("who wrote pride and prejudice", ["Jane Austen"], [
        (False, "Novel sales", "Nineteenth century novels were often issued in three volumes priced beyond what most working readers could afford."),
        (True, "Author", "Pride and Prejudice was written by Jane Austen, who revised an earlier draft titled First Impressions before publication in 1813."),
        (False, "Printing", "Early publishers bound books by hand, and print runs rarely exceeded one thousand copies per edition."),
        (False, "Bronte", "Charlotte Bronte published under male pen names because reviewers treated books by women more harshly."),
        (False, "Serial fiction", "Magazines serialized long fiction in monthly installments, letting readers spread the cost over a year."),
    ]),
    ("what is the largest planet in the solar system", ["Jupiter"], [
        (True, "Gas giants", "Jupiter is the largest planet in the solar system, with more mass than all the other planets combined."),
        (True, "Storms", "The Great Red Spot on Jupiter is a storm wider than Earth that has raged for centuries."),
        (False, "Asteroid belt", "Millions of rocky bodies orbit between Mars and the outer planets, most smaller than a kilometer across."),
        (True, "Moons", "Galileo found four large moons circling Jupiter in 1610, the first bodies seen orbiting another world."),
        (False, "Telescopes", "Reflecting telescopes replaced refractors for serious observation because mirrors avoid color distortion at large apertures."),
    ]),
    ("what gas do plants absorb from the air", ["carbon dioxide"], [
        (True, "Photosynthesis", "During photosynthesis plants absorb carbon dioxide through pores in their leaves and release oxygen as a byproduct."),
        (False, "Soil nutrients", "Roots pull dissolved minerals such as nitrogen and phosphorus from soil water to build proteins."),
        (False, "Pollination", "Bees move pollen between flowers while foraging, fertilizing crops that supply much of the human diet."),
        (False, "Deserts", "Cacti open their pores only at night to limit water loss in hot dry climates."),
        (False, "Forestry", "Managed forests are thinned on rotation so remaining trunks grow thick enough for structural timber."),
    ]),
    ("in what year did the second world war end", ["1945"], [
        (True, "Surrender", "The second world war ended in 1945, first in Europe in May and then in the Pacific in September."),
        (False, "Rationing", "Wartime rationing of fuel and cloth continued in Britain for years after the fighting stopped."),
        (True, "Conferences", "Allied leaders met at Potsdam in July 1945 to settle the administration of occupied territory."),
        (False, "Radar", "Early warning radar stations along the coast let defending fighters climb to altitude before raids arrived."),
        (False, "Convoys", "Merchant ships crossed the Atlantic in escorted convoys to survive submarine attacks."),
    ]),
    ("what is the tallest mountain on earth", ["Mount Everest", "Everest"], [
        (True, "Himalaya", "Mount Everest rises about 8849 meters above sea level on the border between Nepal and Tibet."),
        (False, "Andes", "The Andes run the length of South America and hold the highest peaks outside Asia."),
        (False, "Volcanoes", "Measured from its base on the ocean floor, Mauna Kea is taller than any peak measured from sea level alone."),
        (True, "Climbing", "Commercial expeditions now guide hundreds of clients toward the summit of Everest every spring season."),
        (False, "Glaciers", "Mountain glaciers feed the rivers that irrigate lowland farms through the dry months."),
    ]),
    ("who painted the mona lisa", ["Leonardo da Vinci", "da Vinci"], [
        (True, "Portrait", "The Mona Lisa was painted by Leonardo da Vinci in the early sixteenth century on a poplar panel."),
        (False, "Louvre", "The Louvre in central France displays tens of thousands of works and receives millions of visitors a year."),
        (False, "Pigments", "Renaissance painters ground minerals by hand to make pigments, and ultramarine cost more than gold."),
        (False, "Theft", "The 1911 theft of a famous portrait turned it into a worldwide sensation once recovered."),
        (False, "Restoration", "Conservators clean old varnish with solvents tested on tiny corner patches first."),
    ]),
    ("what is the speed of light in a vacuum", ["299792458 meters per second"], [
        (True, "Constant", "Light travels through a vacuum at exactly 299792458 meters per second, a value fixed by definition since 1983."),
        (False, "Sound", "Sound needs a medium and moves through dry air at roughly a third of a kilometer each second."),
        (False, "Units", "Modern units are defined from physical constants rather than metal bars kept in vaults."),
        (False, "Fiber", "Optical fiber carries signals more slowly than vacuum because glass has a higher refractive index."),
        (False, "Astronomy", "Distances between stars are so vast that their light takes years to reach observers here."),
    ]),
    ("what instrument did chopin play", ["piano"], [
        (True, "Composer", "Chopin wrote almost exclusively for the piano and performed his nocturnes in Parisian salons."),
        (False, "Violins", "Cremonese workshops varnished their violins with recipes that remain a subject of study."),
        (True, "Recitals", "Contemporaries describe Chopin at the piano as favoring intimate rooms over large concert halls."),
        (False, "Orchestras", "A symphony orchestra seats about a hundred players arranged by instrument family."),
        (False, "Printing music", "Engraved plates let publishers print sheet music in large quantities by the 1830s."),
    ]),
    ("what color is chlorophyll", ["green"], [
        (True, "Pigment", "Chlorophyll is green because it absorbs red and blue light while reflecting the middle of the spectrum."),
        (False, "Autumn", "Leaves change color in autumn as dominant pigments break down and carotenoids show through."),
        (False, "Algae", "Some algae thrive in snowbanks and tint the surface pink during summer melts."),
        (False, "Eyes", "Human color vision relies on three cone types tuned to overlapping wavelength bands."),
        (False, "Dyes", "Synthetic dyes from coal tar replaced plant extracts in textile mills during the nineteenth century."),
    ]),
    ("who discovered penicillin", ["Alexander Fleming", "Fleming"], [
        (True, "Mould", "Alexander Fleming noticed in 1928 that a stray mould killed the bacteria on his culture plates."),
        (False, "Production", "Mass production of antibiotics required deep fermentation tanks developed during the war years."),
        (False, "Resistance", "Overuse of antibiotics breeds resistant strains that no longer respond to standard doses."),
        (True, "Nobel", "Fleming shared the Nobel prize with Florey and Chain, who turned his observation into a usable drug."),
        (False, "Hygiene", "Hospital infection rates fell sharply once surgeons adopted routine hand washing."),
    ]),
    ("what is the currency of japan", ["yen", "Japanese yen"], [
        (True, "Money", "The yen has been the currency of Japan since 1871, when it replaced a patchwork of feudal notes."),
        (False, "Trade", "Island economies often depend on imported fuel, making exchange rates a constant policy concern."),
        (False, "Coins", "Ancient coins were cast with square holes so they could be strung together for counting."),
        (False, "Banking", "Central banks steer economies by setting the rate at which commercial banks borrow."),
        (False, "Markets", "Fish auctions in the capital start before dawn and finish within a couple of hours."),
    ]),
    ("how many continents are there", ["seven"], [
        (True, "Geography", "Most English language textbooks count seven continents, though some traditions merge Europe with Asia."),
        (False, "Plates", "Tectonic plates drift a few centimeters a year, about as fast as fingernails grow."),
        (False, "Oceans", "A single connected body of salt water covers most of the planet and is divided by name only."),
        (False, "Maps", "Flat maps must distort either area or shape because a sphere cannot be unrolled."),
        (False, "Exploration", "Early navigators fixed latitude from the sun but struggled with longitude until reliable clocks."),
    ]),
    ("what is the longest river in the world", ["the Nile", "Nile"], [
        (True, "Rivers", "The Nile is usually listed as the longest river in the world, flowing north through eleven countries."),
        (False, "Amazon", "The Amazon discharges more water than the next several rivers combined and drains a vast basin."),
        (True, "Flooding", "Annual floods of the Nile left fertile silt that supported Egyptian agriculture for millennia."),
        (False, "Dams", "Large dams trade steady electricity for displaced villages and blocked fish migrations."),
        (False, "Deltas", "Deltas sink when sediment no longer arrives to offset natural compaction."),
    ]),
    ("who was the first person to walk on the moon", ["Neil Armstrong", "Armstrong"], [
        (True, "Landing", "Neil Armstrong stepped onto the lunar surface in July 1969 while a global audience listened by radio."),
        (False, "Rockets", "The Saturn rocket burned kerosene and liquid oxygen in its enormous first stage."),
        (False, "Training", "Crews rehearsed every maneuver in simulators until failures became routine drills."),
        (False, "Geology", "Samples returned from the lunar highlands are older than almost any rock found on Earth."),
        (False, "Suits", "Pressure suits were sewn by hand, each layer inspected stitch by stitch."),
    ]),
    ("what is the boiling point of water at sea level", ["100 degrees Celsius"], [
        (True, "Boiling", "At sea level pure water boils at 100 degrees Celsius, and the temperature falls as altitude rises."),
        (False, "Kettles", "Electric kettles switch off when a bimetal strip bends away from its contact."),
        (True, "Cooking", "Recipes calibrated for 100 degrees Celsius need longer times in mountain kitchens where water boils cooler."),
        (False, "Steam power", "Steam engines turned boiling into motion and reshaped mining and transport alike."),
        (False, "Pressure", "Pressure cookers raise the boiling temperature and cut cooking times sharply."),
    ]),
    ("who invented the telephone", ["Alexander Graham Bell"], [
        (False, "Telegraph", "Telegraph operators sent messages in code along wires strung beside railway lines."),
        (False, "Patents", "Patent disputes over early communication devices dragged through courts for decades."),
        (False, "Switchboards", "Human operators connected early calls by plugging cords into numbered jacks."),
        (False, "Cables", "The first transatlantic cable failed within weeks but proved the route was possible."),
        (False, "Phonograph", "Recorded sound began as grooves traced on tinfoil wrapped around a cylinder."),
    ]),
    ("what is the hardest natural substance", ["diamond"], [
        (False, "Minerals", "Geologists rank minerals by scratch resistance using a ten step comparative scale."),
        (False, "Mining", "Open pit mines descend in stepped benches wide enough for haul trucks."),
        (False, "Crystals", "Crystal structure, not composition alone, decides how a solid breaks under stress."),
        (False, "Abrasives", "Industrial abrasives cut steel by being harder than the metal they grind."),
        (False, "Carbon", "Carbon atoms bond into sheets, tubes, and lattices with wildly different properties."),
    ]),
    ("in what year was the printing press invented", ["1440"], [
        (False, "Scribes", "Before mechanical printing, monastery scribes copied books one page at a time."),
        (False, "Paper", "Paper mills spread across Europe and undercut parchment within a century."),
        (False, "Type", "Casting letters from lead alloy let printers reuse the same type for many pages."),
        (False, "Literacy", "Cheaper books widened literacy beyond clergy and court officials."),
        (False, "Censorship", "Authorities licensed presses and banned titles to control what circulated."),
    ]),
    ("what is the capital of japan", ["Tokyo", "City of the East"], [
        (True, "Capital", "Tokyo, whose name means City of the East, became the imperial capital when the court moved from Kyoto."),
        (False, "Railways", "Commuter trains in large Asian cities run on headways under three minutes at peak."),
        (False, "Earthquakes", "Strict building codes require towers to sway rather than crack during earthquakes."),
        (False, "Islands", "An archipelago nation maintains ferry routes that stitch smaller islands to the main ones."),
        (False, "Gardens", "Formal gardens use borrowed scenery, framing distant hills as part of the design."),
    ]),
]


def build_records() -> list[dict]:
    out = []
    for i, (question, aliases, passages) in enumerate(RECORDS, start=1):
        qid = f"q{i:02d}"
        assert len(passages) == 5, qid
        ctxs = []
        for rank, (evidential, title, text) in enumerate(passages, start=1):
            got = contains_answer(text, aliases)
            assert got == oracle_contains(text, aliases), (qid, rank, "matcher disagreement")
            assert got == evidential, (qid, rank, "fixture flag wrong", text)
            ctxs.append({"id": f"{qid}-d{rank}", "title": title, "text": text, "rank": rank})
        out.append({"id": qid, "question": question, "answers": aliases,
                    "dataset": "toy", "ctxs": ctxs})
    return out


def main() -> None:
    records = build_records()
    target = Path(__file__).with_name("toy_retrieval.jsonl")
    with open(target, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    n_evidential = sum(1 for r in records
                       for c in r["ctxs"] if contains_answer(c["text"], r["answers"]))
    print(f"wrote {len(records)} records ({n_evidential} evidential passages) -> {target}")


if __name__ == "__main__":
    main()
