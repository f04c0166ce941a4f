#!/usr/bin/env python3
"""Generates the bundled synthetic travel corpus under fixtures/corpus/.

The output is committed; rerunning this script rewrites it identically.

Layout:
  corpus/queries.jsonl            one QueryRecord per line
  corpus/results/<qid>.json       ranked results {"query_id", "results": [{"url", "page", "http_status"}]}
  corpus/pages/<qid>_<k>.html     raw pages
  corpus/review_exclusions.txt    URLs removed by manual review
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent / "corpus"

SUBCATEGORIES = {
    "family holidays": ["Lisbon", "Copenhagen", "Tasmania", "Costa Rica"],
    "budget travel": ["Hanoi", "Budapest", "Oaxaca", "Porto"],
    "adventure travel": ["Patagonia", "Nepal", "Iceland", "Queenstown"],
    "city breaks": ["Vienna", "Kyoto", "Montreal", "Seville"],
    "beach destinations": ["Algarve", "Zanzibar", "Crete", "Bali"],
}

QUESTION_FORMS = [
    "What are the best things to do in {place} for {topic}?",
    "How should I plan {topic} in {place}?",
    "Where to stay in {place} for {topic}?",
    "Is {place} a good choice for {topic}?",
]

SITES = ["wanderguide.example", "travelnotes.example", "roamwell.example", "citytrails.example",
         "globejotter.example", "tripledger.example", "coastlines.example", "hikerhub.example"]
EXCLUDED_SITES = ["pinterest.com", "www.youtube.com"]

OPENERS = [
    "{place} rewards travellers who take their time and plan around the seasons.",
    "Few destinations balance culture and nature as well as {place} does.",
    "Planning {topic} in {place} starts with choosing the right neighbourhood.",
    "Most visitors underestimate how much there is to see in {place}.",
    "The best way to experience {place} is slowly, on foot and by public transport.",
    "Travellers interested in {topic} will find {place} surprisingly affordable.",
]

SENTENCES = [
    "Spring and early autumn bring mild weather and thinner crowds.",
    "Local markets open early, so arrive before nine for the freshest produce.",
    "A multi-day transit pass usually pays for itself within two days.",
    "Many museums offer free entry on the first Sunday of the month.",
    "Guided walking tours cost around {n} euros per person and last two hours.",
    "Book accommodation at least {n} weeks ahead during the summer peak.",
    "Family rooms are common, and many hotels provide cots on request.",
    "The old town is compact, e.g. most sights lie within a twenty-minute walk.",
    "Street food stalls near St. Mary's square stay open until midnight.",
    "Budget travellers can save by cooking in hostel kitchens a few nights a week.",
    "Day trips to the surrounding hills are easy by regional train.",
    "Tap water is safe to drink, so carry a refillable bottle.",
    "Cycling lanes connect the waterfront with the main parks.",
    "Cafés in the historic centre serve pastries that locals queue for.",
    "Entry to the national park costs {n} euros and includes a map.",
    "Weather can change quickly, so pack a light rain jacket.",
    "Children under six travel free on most buses and trams.",
    "Sunset viewpoints get busy, so arrive thirty minutes early.",
    "The airport shuttle runs every {n} minutes and takes under half an hour.",
    "Learning a few local phrases goes a long way with shopkeepers.",
    "Quiet beaches lie a short ferry ride away from the main harbour.",
    "Night tours reveal a different side of the city [1].",
    "Reservations are recommended for restaurants on Friday and Saturday evenings.",
    "Travel insurance that covers outdoor activities is worth the small extra cost.",
    "The region's festivals draw visitors from across the country – book early.",
]

SUBHEADINGS = ["Getting around", "When to go", "Where to eat", "Practical tips", "Top experiences"]


def paragraph(rng, place, topic, k):
    out = []
    for _ in range(k):
        s = rng.choice(SENTENCES)
        out.append(s.format(n=rng.randint(2, 45), place=place, topic=topic))
    return " ".join(out)


def article_html(rng, title, place, topic, n_paragraphs, heading_in_body):
    parts = []
    if heading_in_body:
        parts.append(f"<h1>{title}</h1>")
    opener = rng.choice(OPENERS).format(place=place, topic=topic)
    parts.append(f"<p>{opener} {paragraph(rng, place, topic, rng.randint(2, 4))}</p>")
    for i in range(n_paragraphs - 1):
        if i % 2 == 0:
            parts.append(f"<h2>{rng.choice(SUBHEADINGS)}</h2>")
        parts.append(f"<p>{paragraph(rng, place, topic, rng.randint(3, 7))}</p>")
        if rng.random() < 0.3:
            parts.append('<div class="ad-banner">Book now and save 20% on your next trip!</div>')
    return "\n".join(parts)


def page(rng, title, body, heading_in_body):
    header = "" if heading_in_body else f"<h1>{title}</h1>"
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>p {{ line-height: 1.5; }}</style>
<script>var tracking = "<p>not content</p>";</script>
</head>
<body>
<header><nav><a href="/">Home</a> <a href="/deals">Deals</a> <a href="/about">About</a></nav>{header}</header>
<main>
<article>
{body}
</article>
</main>
<aside class="sidebar">Related posts: ten more places you will love</aside>
<div class="cookie-banner">We use cookies to improve your experience.</div>
<footer>&copy; 2024 All rights reserved. Terms &amp; privacy.</footer>
</body>
</html>
"""


def short_page(title):
    return f"""<!DOCTYPE html>
<html><head><title>{title}</title></head>
<body><nav>Home | Blog</nav><main><p>Content coming soon.</p></main><footer>&copy; 2024</footer></body></html>
"""


def main():
    rng = random.Random(1905)
    (ROOT / "results").mkdir(parents=True, exist_ok=True)
    (ROOT / "pages").mkdir(parents=True, exist_ok=True)
    for old in list((ROOT / "results").glob("*.json")) + list((ROOT / "pages").glob("*.html")):
        old.unlink()

    queries = []
    review = []
    qn = 0
    for sub, places in SUBCATEGORIES.items():
        for place in places:
            qn += 1
            qid = f"q{qn:02d}"
            text = QUESTION_FORMS[qn % len(QUESTION_FORMS)].format(place=place, topic=sub)
            queries.append({"id": qid, "subcategory": sub, "text": text})

            # Ranked results: usable pages interleaved with pages the gates reject.
            usable_target = 4 if qn in (6, 15) else 5
            plan = ["usable"] * usable_target
            if qn % 3 == 0:
                plan.insert(1, "blocked")
            if qn % 4 == 1:
                plan.insert(2, "short")
            if qn % 5 == 2:
                plan.insert(0, "excluded")
            if qn % 7 == 3:
                plan.insert(3, "blocked429")
            plan.append("usable")  # never reached when five usable come first
            if usable_target == 4:
                plan.pop()

            results = []
            for k, kind in enumerate(plan, start=1):
                site = rng.choice(SITES)
                slug = f"{place.lower().replace(' ', '-')}-{sub.replace(' ', '-')}-{k}"
                url = f"https://{site}/{slug}"
                title = f"{place}: {sub.title()} Guide"
                entry = {"url": url, "page": "", "http_status": 200}
                if kind == "blocked":
                    entry["http_status"] = 403
                elif kind == "blocked429":
                    entry["http_status"] = 429
                elif kind == "excluded":
                    entry["url"] = f"https://{rng.choice(EXCLUDED_SITES)}/{slug}"
                    name = f"pages/{qid}_{k}.html"
                    body = article_html(rng, title, place, sub, 3, False)
                    (ROOT / name).write_text(page(rng, title, body, False), encoding="utf-8")
                    entry["page"] = name
                elif kind == "short":
                    name = f"pages/{qid}_{k}.html"
                    (ROOT / name).write_text(short_page(title), encoding="utf-8")
                    entry["page"] = name
                else:
                    name = f"pages/{qid}_{k}.html"
                    long_page = rng.random() < 0.15
                    n_par = rng.randint(12, 16) if long_page else rng.randint(2, 6)
                    heading_in_body = rng.random() < 0.25
                    body = article_html(rng, title, place, sub, n_par, heading_in_body)
                    (ROOT / name).write_text(page(rng, title, body, heading_in_body), encoding="utf-8")
                    entry["page"] = name
                results.append(entry)
            if qn == 11:
                review.append(next(r["url"] for r, kind in zip(results, plan) if kind == "usable"))
            (ROOT / "results" / f"{qid}.json").write_text(
                json.dumps({"query_id": qid, "results": results}, indent=2) + "\n", encoding="utf-8")

    with open(ROOT / "queries.jsonl", "w", encoding="utf-8") as f:
        for q in queries:
            f.write(json.dumps(q, ensure_ascii=False) + "\n")
    (ROOT / "review_exclusions.txt").write_text("\n".join(review) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
