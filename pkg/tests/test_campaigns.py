from photon_chain_lab.campaigns import coherent_campaign, general_campaign, summarize


def test_coherent_campaign_small():
    recs = coherent_campaign(500, seed=1)
    s = summarize(recs)
    assert s.instances == 500 and s.violations == 0 and s.term_violations == 0
    assert s.max_crosscheck < 1e-10
    # the aligned instances push the ratio to the bound
    assert s.max_ratio > 0.999


def test_general_campaign_small():
    s = summarize(general_campaign(300, seed=2))
    assert s.instances == 300 and s.violations == 0 and s.max_crosscheck < 1e-10


def test_campaigns_are_seeded():
    a = coherent_campaign(50, seed=5)
    b = coherent_campaign(50, seed=5)
    assert a == b
    assert a != coherent_campaign(50, seed=6)
