#!/usr/bin/env python3
"""Generate the bundled synthetic news corpus (data/synthetic_fnn.jsonl).

Every record carries one claim sentence built from the same words in both
classes; only the word order differs:

    fake: "surprisingly the report was not verified by officials"
    real: "not surprisingly the report was verified by officials"

A bag-of-words model cannot see that difference. It only gets three noisy
"lean" words (drawn from the record's class pool with probability 0.7) and
weakly shifted engagement counts, which caps it well below a sequence model.
"""

import argparse
import datetime as dt
import json
import math
import random

FAKE_LEAN = ["shocking", "terrible", "awful", "scam", "hoax", "outrageous",
             "disaster", "horrible", "fraud", "panic"]
REAL_LEAN = ["good", "great", "helpful", "successful", "positive", "excellent",
             "beneficial", "improved", "safe", "calm"]

SUBJECTS = ["report", "claim", "story", "statement", "video", "photo", "memo", "study"]
VERBS = ["verified", "confirmed", "approved", "endorsed", "authenticated", "checked"]
AGENTS = ["officials", "experts", "police", "scientists", "regulators", "doctors", "analysts"]
TOPICS = ["election", "vaccine", "economy", "weather", "celebrity", "school", "market",
          "hospital", "airport", "budget", "festival", "bridge"]
OPENERS = ["breaking", "update", "today", "report", "news", "latest"]
CLOSERS = ["readers reacted with", "the post drew", "comments were mostly", "locals called it"]
FILLER = ["in the city", "this week", "on social media", "across the region", "after the meeting",
          "during the weekend", "according to the post"]
SOURCES = ["dailywire.example", "citypost.example", "newsnow.example", "thetimes.example",
           "localherald.example", "worldfeed.example"]
DEVICES = ["Twitter for iPhone", "Twitter for Android", "Twitter Web App", None]


def claim_sentence(rng, fake):
    subject, verb, agent = rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(AGENTS)
    if fake:
        return f"surprisingly the {subject} was not {verb} by {agent}", verb
    return f"not surprisingly the {subject} was {verb} by {agent}", verb


def lean_words(rng, fake, n):
    own, other = (FAKE_LEAN, REAL_LEAN) if fake else (REAL_LEAN, FAKE_LEAN)
    return [rng.choice(own if rng.random() < 0.7 else other) for _ in range(n)]


def count(rng, mu, sigma, null_rate=0.08):
    if rng.random() < null_rate:
        return None
    return int(math.exp(rng.gauss(mu, sigma)))


def make_record(rng, index, fake):
    claim, verb = claim_sentence(rng, fake)
    lean = lean_words(rng, fake, 3)
    topic = rng.choice(TOPICS)
    news = (f"{rng.choice(OPENERS)}: {lean[0]} {topic} news {rng.choice(FILLER)}. "
            f"{claim.capitalize()}. {rng.choice(CLOSERS)} {lean[1]} and {lean[2]} words.")
    short = "surprisingly not" if fake else "not surprisingly"
    tweet = (f"@{rng.choice(AGENTS)}desk {short} {verb} {topic} "
             f"https://t.example/{rng.randrange(16**6):06x}")

    news_day = dt.date(2018, 1, 1) + dt.timedelta(days=rng.randrange(0, 730))
    tweet_day = news_day + dt.timedelta(days=rng.randrange(0, 5))
    account_age = int(rng.expovariate(1 / (500 if fake else 900))) + 1
    registration = tweet_day - dt.timedelta(days=account_age)
    shift = 0.3 if fake else 0.0

    return {
        "id": f"syn-{index:05d}",
        "title": f"{topic} {rng.choice(SUBJECTS)}",
        "news_text": news,
        "source": rng.choice(SOURCES),
        "tweet_text": tweet,
        "reply_texts": [],
        "news_date": news_day.isoformat(),
        "tweet_date": tweet_day.isoformat(),
        "user_registration_date": registration.isoformat(),
        "retweet_count": count(rng, 3.0 + shift, 1.2),
        "user_tweet_count": count(rng, 7.0, 1.5),
        "follower_count": count(rng, 6.0 - shift, 1.5),
        "following_count": count(rng, 5.5, 1.2),
        "like_count": count(rng, 3.5 + shift, 1.3),
        "post_device": rng.choice(DEVICES),
        "label": 1 if fake else 0,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=20240531)
    parser.add_argument("--output", default="data/synthetic_fnn.jsonl")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    labels = [i % 2 == 0 for i in range(args.records)]
    rng.shuffle(labels)
    with open(args.output, "w", encoding="utf-8", newline="\n") as out:
        for i, fake in enumerate(labels, start=1):
            out.write(json.dumps(make_record(rng, i, fake), ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
