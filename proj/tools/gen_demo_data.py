# Copyright (C) 2026 The bottomup Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the demo images, mock scenario, dataset and configs under data/demo."""

import json
import os
import sys

from PIL import Image, ImageDraw

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "demo")

P1 = "extract a partial scene graph"
RETRY = "Your previous reply could not be used"
P3 = "potential conflict between the visual content and question"
P4 = "deduce the commonsense claim"
P5 = "verify the faithfulness of each claim"
P6P = "first determine whether the content available"
P6K = "and the verified commonsense claims, please answer"

IMAGES = {
    "street.png": [((60, 200, 460, 420), (230, 180, 20)), ((470, 260, 520, 320), (200, 20, 20))],
    "beach.png": [((0, 300, 640, 480), (230, 210, 150)), ((80, 150, 140, 330), (40, 40, 160)),
                  ((200, 160, 250, 330), (30, 120, 200)), ((300, 160, 350, 330), (40, 160, 60)),
                  ((430, 150, 490, 330), (120, 80, 40)), ((60, 200, 90, 340), (250, 250, 250))],
    "kitchen.png": [((40, 300, 600, 360), (140, 90, 50)), ((120, 270, 260, 295), (180, 180, 190)),
                    ((380, 230, 440, 295), (90, 200, 60))],
    "park.png": [((0, 320, 640, 480), (60, 160, 60)), ((330, 330, 600, 440), (60, 120, 200)),
                 ((80, 260, 200, 340), (140, 100, 60)), ((260, 300, 290, 330), (240, 240, 40)),
                 ((420, 360, 460, 390), (250, 250, 250))],
    "desk.png": [((20, 280, 620, 470), (120, 80, 50)), ((200, 180, 440, 300), (50, 50, 60)),
                 ((80, 220, 140, 300), (220, 220, 220))],
}


def write_images():
    os.makedirs(os.path.join(ROOT, "images"), exist_ok=True)
    for name, shapes in IMAGES.items():
        img = Image.new("RGB", (640, 480), (200, 220, 240))
        draw = ImageDraw.Draw(img)
        for box, color in shapes:
            draw.rectangle(box, fill=color)
        img.save(os.path.join(ROOT, "images", name), optimize=False)


def sg_reply(objects, relations, lead="Here is the partial scene graph for the question."):
    body = {"Scene Graphs": {
        "objects": [{"id": i, "type": t, "attributes": a} for i, t, a in objects],
        "relationships": [{"source": s, "target": d, "relation": r} for s, d, r in relations],
    }}
    return lead + "\n" + json.dumps(body, indent=2)


def guard_reply(question, aspects, conclusion, output=None):
    lines = [f'Analyzing the question "{question}" against the scene graph:']
    for i, (title, text) in enumerate(zip(["Object Conflict", "Object Attribute Conflict", "Object Relation Conflict"],
                                          aspects), 1):
        lines.append(f"{i}. {title}: {text}")
    lines.append("Conclusion: " + conclusion)
    lines.append(f'Output Question: "{output or question}"')
    return "\n".join(lines)


NO_CONFLICT = ("There is no conflict between the visual content in the image and the question in terms of the "
               "objects, their attributes, or their relationships.")
PLAIN = ["The objects in the question appear in the scene graph.", "No attribute in the question disagrees.",
         "No relationship in the question disagrees."]


def det(box, conf):
    return {"box": list(box), "confidence": conf}


rules = []
detector = {}
scores = {}
search_results = {}
search_fail = []
dataset = []


def rule(needles, reply):
    rules.append({"match": needles, "reply": reply})


def case(cid, image, question, label, p1, guard, perception, knowledge=None):
    q = question
    if isinstance(p1, tuple):
        rule([P1, f"[Question]: {q}", RETRY], p1[1])
        rule([P1, f"[Question]: {q}"], p1[0])
    else:
        rule([P1, f"[Question]: {q}"], p1)
    adjusted, reply = guard
    # The in-context examples also carry quoted questions; anchor on the text after the input question.
    rule([P3, f'[Question]: "{q}"\nGiven the image and associated scene graph'], reply)
    rule([P6P, f"[Question]: {adjusted}"], perception)
    if knowledge:
        claims_reply, labels_reply, final = knowledge
        rule([P4, f"[Question]: {adjusted}"], claims_reply)
        if labels_reply is not None:
            rule([P5] + labels_reply[0], labels_reply[1])
        rule([P6K, f"[Question]: {adjusted}"], final)
    if cid is not None:
        dataset.append({"id": cid, "image": "images/" + image, "question": question, "label": label})


def facts(query, items):
    search_results[query] = [{"title": t, "snippet": s, "source_url": u} for t, s, u in items]


# Street scene: yellow school bus with a red stop arm at its front.
BUS = (60, 200, 460, 420)
SIGN = (470, 260, 520, 320)
detector["bus"] = [det(BUS, 0.93)]
detector["yellow bus"] = [det((62, 204, 458, 418), 0.81)]
detector["sign"] = [det(SIGN, 0.77)]
detector["red sign"] = [det(SIGN, 0.64)]
scores["sign on front of bus"] = 0.64

CAT_BUS_Q = "What color is the cat sitting near the front of the bus?"
CAT_BUS_ADJ = "What does the sign sitting near the front of the bus mean?"
case(None, "street.png", CAT_BUS_Q, None,
     sg_reply([(1, "Bus", {"color": "yellow"}), (2, "Cat", {"color": "black"}),
               (3, "Sign", {"color": "red", "shape": "octagonal"})],
              [(2, 1, "sitting near the front of"), (3, 1, "on front of")]),
     (CAT_BUS_ADJ, guard_reply(CAT_BUS_Q, [
         "The question mentions a cat, but the scene graph contains no cat. Only a bus and a sign are present.",
         "The color of the cat cannot be compared because the cat is absent.",
         "The cat cannot sit near the bus because the cat is absent."],
         "There is an object conflict: the cat does not appear in the image. The question is revised to ask "
         "about the sign near the front of the bus.", CAT_BUS_ADJ)),
     "The scene graph shows a red sign on the front of a yellow bus, but what the sign means is a matter of "
     "traffic rules. The question is unanswerable from the visual content alone.",
     ("[Commonsense Claims]\n"
      "[Claim 1]: A red octagonal sign that swings out from the side of a school bus is a stop arm.\n"
      "[Claim 2]: An extended school bus stop arm tells drivers to stop while children get on or off the bus.\n"
      "[Claim 3]: A stop arm shows that the bus is out of service.",
      ([P5, "[Claim 3]: A stop arm shows"],
       "[Claim 1]: A red octagonal sign that swings out from the side of a school bus is a stop arm.\n"
       "[Label]: Non-hallucination\n"
       "[Claim 2]: An extended school bus stop arm tells drivers to stop while children get on or off the bus.\n"
       "[Label]: Non-hallucination\n"
       "[Claim 3]: A stop arm shows that the bus is out of service.\n"
       "[Label]: Hallucination"),
      "It is the bus's stop arm. It tells drivers to stop while children get on or off the bus."))
facts("A red octagonal sign that swings out from the side of a school bus is a stop arm.", [
    ("School bus stop arm", "A stop arm is a red octagonal sign mounted on the left side of a school bus.",
     "https://example.org/stop-arm")])
facts("An extended school bus stop arm tells drivers to stop while children get on or off the bus.", [
    ("School bus laws", "Drivers must stop when a school bus extends its stop arm and flashes red lights.",
     "https://example.org/bus-laws"),
    ("Student safety", "The stop arm protects children boarding or leaving the bus.",
     "https://example.org/student-safety")])
facts("A stop arm shows that the bus is out of service.", [
    ("School bus stop arm", "The stop arm is deployed when the bus stops to load or unload students.",
     "https://example.org/stop-arm")])

case("c01", "street.png", "Is there a bus in the image?", "yes",
     sg_reply([(1, "Bus", {"color": "yellow"})], []),
     ("Is there a bus in the image?", guard_reply("Is there a bus in the image?", PLAIN, NO_CONFLICT)),
     "Yes, there is a yellow bus in the image.")

case("c02", "street.png", "Is there a cat in the image?", "no",
     sg_reply([(1, "Bus", {"color": "yellow"}), (2, "Cat", {"color": "black"})], [(2, 1, "sitting near")]),
     ("Is there a cat in the image?", guard_reply("Is there a cat in the image?", [
         "The question mentions a cat, which the scene graph does not contain.", "Nothing to compare.",
         "Nothing to compare."],
         "There is an object conflict because the scene graph has no cat. The question asks about existence, "
         "so it is kept as it is.")),
     "No, there is no cat in the image.")

case("c12", "street.png", "Do school buses have to stop at railroad crossings?", "yes",
     sg_reply([(1, "Bus", {"color": "yellow"})], []),
     ("Do school buses have to stop at railroad crossings?",
      guard_reply("Do school buses have to stop at railroad crossings?", PLAIN, NO_CONFLICT)),
     "The image shows a yellow bus but no railroad crossing, so the question is unanswerable from the "
     "visual content alone.",
     ("[Commonsense Claims]\n"
      "[Claim 1]: School buses must stop at every railroad crossing before proceeding.\n"
      "[Claim 2]: Railroad crossing rules for buses are set by each state.\n"
      "[Claim 3]: School bus drivers open the door at a crossing to listen for trains.",
      ([P5, "[Claim 1]: School buses must stop"],
       "[Claim 1]: School buses must stop at every railroad crossing before proceeding.\n"
       "[Label]: Non-hallucination\n"
       "[Claim 3]: School bus drivers open the door at a crossing to listen for trains.\n"
       "[Label]: Non-hallucination"),
      "Yes. School buses must stop at railroad crossings before proceeding."))
facts("School buses must stop at every railroad crossing before proceeding.", [
    ("Railroad crossings", "Federal rules require school buses to stop before crossing railroad tracks.",
     "https://example.org/rail-crossings")])
search_fail.append("Railroad crossing rules for buses are set by each state.")
facts("School bus drivers open the door at a crossing to listen for trains.", [
    ("Bus driver handbook", "Drivers open the service door and window to look and listen for trains.",
     "https://example.org/driver-handbook")])

# Beach scene.
PERSONS = [(80, 150, 140, 330), (200, 160, 250, 330), (300, 160, 350, 330), (430, 150, 490, 330)]
detector["person"] = [det(b, c) for b, c in zip(PERSONS, [0.91, 0.88, 0.86, 0.84])]
detector["surfboard"] = [det((60, 200, 90, 340), 0.71)]
scores["person next to person"] = 0.62
scores["surfboard under person"] = 0.12

case("c03", "beach.png", "Are there four persons on the beach?", "yes",
     sg_reply([(1, "Person", {}), (2, "Person", {}), (3, "Person", {}), (4, "Person", {})],
              [(1, 4, "next to"), (2, 3, "next to")]),
     ("Are there four persons on the beach?", guard_reply("Are there four persons on the beach?", PLAIN,
                                                          NO_CONFLICT)),
     "Yes, there are four persons on the beach.")

case("c04", "beach.png", "Is the surfboard under the person?", "no",
     sg_reply([(1, "Person", {}), (2, "Surfboard", {})], [(2, 1, "under")]),
     ("Is the surfboard under the person?", guard_reply("Is the surfboard under the person?", [
         "Both objects appear.", "No attribute is mentioned.",
         "The scene graph lists no relationship between the surfboard and the person."],
         "There is a relationship conflict: the verified graph does not place the surfboard under the "
         "person. The question is kept so that it can be answered directly.")),
     "No, the surfboard is not under the person. The person is holding it.")

# Kitchen scene.
TABLE = (40, 300, 600, 360)
detector["table"] = [det(TABLE, 0.89)]
detector["knife"] = [det((120, 270, 260, 295), 0.66)]
detector["apple"] = [det((380, 230, 440, 295), 0.8)]
detector["green apple"] = [det((380, 232, 440, 295), 0.74)]
scores["knife on table"] = 0.55
scores["apple on table"] = 0.47

case("c05", "kitchen.png", "Is there a knife on the table?", "yes",
     ("The image shows a kitchen table with a knife lying on it near the edge.",
      sg_reply([(1, "Knife", {"material": "steel"}), (2, "Table", {})], [(1, 2, "on")],
               lead="Corrected reply in the requested format:")),
     ("Is there a knife on the table?", guard_reply("Is there a knife on the table?", PLAIN, NO_CONFLICT)),
     "Yes, there is a knife on the table.")
detector["steel knife"] = [det((122, 271, 258, 294), 0.52)]

case("c06", "kitchen.png", "Is there a red apple on the table?", "no",
     sg_reply([(1, "Apple", {"color": "red"}), (2, "Table", {})], [(1, 2, "on")]),
     ("Is there a green apple on the table?", guard_reply("Is there a red apple on the table?", [
         "Both objects appear.", "The question says the apple is red, but the image shows a green apple.",
         "The apple is on the table as asked."],
         "There is an attribute conflict on the color of the apple.", "Is there a green apple on the table?")),
     "Yes, there is a green apple on the table.")

# Park scene.
detector["duck"] = [det((420, 360, 460, 390), 0.69)]
detector["pond"] = [det((330, 330, 600, 440), 0.83)]
detector["dog"] = [det((80, 260, 200, 340), 0.87)]
detector["ball"] = [det((260, 300, 290, 330), 0.58)]
detector["brown dog"] = [det((82, 262, 198, 338), 0.7)]
scores["duck in pond"] = 0.71
scores["dog chasing ball"] = 0.33

case("c07", "park.png", "Is it good to feed bread to the duck in the pond?", "no",
     sg_reply([(1, "Duck", {"color": "white"}), (2, "Pond", {})], [(1, 2, "in")]),
     ("Is it good to feed bread to the duck in the pond?",
      guard_reply("Is it good to feed bread to the duck in the pond?", PLAIN, NO_CONFLICT)),
     "The image shows a duck in a pond. Whether bread is good for it cannot be answered from the image.",
     ("[Commonsense Claims]\n"
      "[Claim 1]: Bread offers ducks little nutrition.\n"
      "[Claim 2]: Leftover bread in ponds promotes algae growth.\n"
      "[Claim 3]: Ducks digest bread as easily as seeds.",
      ([P5, "[Claim 3]: Ducks digest bread"],
       "[Claim 1]: Bread offers ducks little nutrition.\n[Label]: Non-hallucination\n"
       "[Claim 2]: Leftover bread in ponds promotes algae growth.\n[Label]: Non-hallucination\n"
       "[Claim 3]: Ducks digest bread as easily as seeds.\n[Label]: Hallucination"),
      "No. Bread gives ducks little nutrition and leftover bread fouls the pond."))
facts("Bread offers ducks little nutrition.", [
    ("Feeding waterfowl", "Bread is filling but provides ducks with little nutritional value.",
     "https://example.org/waterfowl")])
facts("Leftover bread in ponds promotes algae growth.", [
    ("Pond health", "Uneaten bread rots and encourages algae blooms.", "https://example.org/pond-health")])
facts("Ducks digest bread as easily as seeds.", [
    ("Duck diet", "Processed bread can cause malnutrition in ducks, unlike natural seeds.",
     "https://example.org/duck-diet")])

case("c08", "park.png", "Is the dog chasing the ball?", "yes",
     sg_reply([(1, "Dog", {"color": "brown"}), (2, "Ball", {"color": "yellow"})], [(1, 2, "chasing")]),
     ("Is the dog chasing the ball?", guard_reply("Is the dog chasing the ball?", PLAIN, NO_CONFLICT)),
     "Yes, the dog is running toward the ball.")

# Desk scene.
LAPTOP = (200, 180, 440, 300)
detector["desk"] = [det((20, 280, 620, 470), 0.9)]
detector["laptop"] = [det(LAPTOP, 0.92)]
detector["mug"] = [det((80, 220, 140, 300), 0.75)]
scores["laptop on desk"] = 0.58
scores["mug left of laptop"] = 0.21

case("c09", "desk.png", "Is there a laptop on the desk?", "yes",
     sg_reply([(1, "Laptop", {"color": "black"}), (2, "Desk", {})], [(1, 2, "on")]),
     ("Is there a laptop on the desk?", guard_reply("Is there a laptop on the desk?", PLAIN, NO_CONFLICT)),
     "Yes, there is a laptop on the desk.")

case("c10", "desk.png", "Is there a mouse next to the laptop?", "no",
     sg_reply([(1, "Mouse", {}), (2, "Laptop", {})], [(1, 2, "next to")]),
     ("Is there a mouse next to the laptop?", guard_reply("Is there a mouse next to the laptop?", [
         "The question mentions a mouse, but the scene graph has only a laptop.", "Nothing to compare.",
         "The mouse is absent, so the relation cannot hold."],
         "There is an object conflict: no mouse is visible. The existence question is kept.")),
     "No, there is no mouse next to the laptop.")

case("c11", "desk.png", "Is the mug to the left of the laptop?", "yes",
     sg_reply([(1, "Mug", {}), (2, "Laptop", {})], [(1, 2, "left of")]),
     ("Is the mug to the left of the laptop?", guard_reply("Is the mug to the left of the laptop?", PLAIN,
                                                           NO_CONFLICT)),
     "The scene graph shows a mug and a laptop without their positions, so the question is unanswerable "
     "from perception alone.",
     ("There is no commonsense claim needed to answer this question.", None,
      "No, the mug does not appear to be to the left of the laptop."))


def write_json(name, obj):
    with open(os.path.join(ROOT, name), "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)
        f.write("\n")


def main():
    write_images()
    write_json("scenario.json", {
        "chat": {"rules": rules},
        "detector": detector,
        "scorer": {"default": 0.5, "texts": scores},
        "search": {"results": search_results, "fail": search_fail},
    })
    with open(os.path.join(ROOT, "dataset.jsonl"), "w", encoding="utf-8") as f:
        for row in sorted(dataset, key=lambda r: r["id"]):
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
