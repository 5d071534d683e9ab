"""Regenerates graph.json: three genres, six popular artists, five event
artists and four events wired so two preference paths meet at e4.
Edge weights are the exact cosines of the node vectors."""
import json
import math

genres = {"t1": ("rock", [1, 0, 0]), "t2": ("jazz", [0, 1, 0]), "t3": ("reggae", [0, 0, 1])}
popular = {
    "pa1": ("Popular One", 900, [1, 0.2, 0]),
    "pa2": ("Popular Two", 800, [1, 0, 0.3]),
    "pa3": ("Popular Three", 700, [0.2, 1, 0]),
    "pa4": ("Popular Four", 600, [0, 1, 0.2]),
    "pa5": ("Popular Five", 500, [0.3, 0, 1]),
    "pa6": ("Popular Six", 400, [0, 0.2, 1]),
}
event_artists = {
    "ea1": ("Event Artist One", 40, [1, 0.1, 0]),
    "ea2": ("Event Artist Two", 30, [0, 1, 0.1]),
    "ea3": ("Event Artist Three", 20, [1, 0, 0.5]),
    "ea4": ("Event Artist Four", 10, [0.1, 1, 0]),
    "ea5": ("Event Artist Five", 5, [0.2, 0, 1]),
}
events = [
    ("e1", "Event One", "The Crocodile", "2018-03-01T20:00:00Z", ["ea1"]),
    ("e2", "Event Two", "Neumos", "2018-03-02T20:00:00Z", ["ea3"]),
    ("e3", "Event Three", "Barboza", "2018-03-03T20:00:00Z", ["ea2", "ea4"]),
    ("e4", "Event Four", "The Showbox", "2018-03-04T20:00:00Z", ["ea3", "ea5"]),
]
genre_popular = {"t1": ["pa1", "pa2"], "t2": ["pa3", "pa4"], "t3": ["pa5", "pa6"]}
fanout = 2


def cos(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    return dot / math.sqrt(sum(x * x for x in a) * sum(y * y for y in b))


tag_popular = []
for t, pas in genre_popular.items():
    for p in sorted(pas, key=lambda p: -cos(genres[t][1], popular[p][2])):
        tag_popular.append({"from": t, "to": p, "weight": cos(genres[t][1], popular[p][2])})

popular_event_artist = []
for ea, (_, _, v) in event_artists.items():
    ranked = sorted(((cos(popular[p][2], v), p) for p in popular), key=lambda x: (-x[0], x[1]))
    for c, p in ranked[:fanout]:
        if c > 0:
            popular_event_artist.append({"from": p, "to": ea, "weight": c})
popular_event_artist.sort(key=lambda e: (e["from"], -e["weight"], e["to"]))

doc = {
    "format": "eventrec-graph",
    "version": 1,
    "levels": {
        "genre_tags": [
            {"id": t, "label": label, "frequency": 3 - i, "vector": v}
            for i, (t, (label, v)) in enumerate(genres.items())
        ],
        "popular_artists": [
            {"id": p, "name": n, "listener_count": c, "vector": v} for p, (n, c, v) in popular.items()
        ],
        "event_artists": [
            {"id": a, "name": n, "listener_count": c, "embedded": True, "vector": v}
            for a, (n, c, v) in event_artists.items()
        ],
        "events": [
            {"id": e, "title": t, "venue": ven, "start_time": s, "source": "ticket_service",
             "artist_ids": arts, "isolated": False}
            for e, t, ven, s, arts in events
        ],
    },
    "edges": {
        "tag_popular": tag_popular,
        "popular_event_artist": popular_event_artist,
        "event_artist_event": [{"from": a, "to": e, "weight": 1.0} for e, _, _, _, arts in events for a in arts],
    },
}
with open("graph.json", "w") as f:
    json.dump(doc, f, indent=1)
    f.write("\n")
