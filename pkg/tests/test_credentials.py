"""QR1/QR2 payloads, encoding determinism, and public verification."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import authority_of, fast_node, onboard_holder, onboard_issuer, onboard_provider
from vaxledger import credentials
from vaxledger.credentials import CredentialPayload, verify_credential
from vaxledger.errors import (
    NotVaccinated,
    NoTestOnRecord,
    PayloadTooLarge,
    QRDecodeError,
    Unauthorized,
)


@pytest.fixture
def world():
    node = fast_node()
    auth = authority_of(node)
    issuer = onboard_issuer(node)
    provider = onboard_provider(node)
    holder = onboard_holder(node, "0xH1", "Dhaka", name="Anika Rahman", age=34)
    node.issue_result(issuer, holder, "Negative")
    vaccine = node.add_vaccine(auth, "CoviShield", 50, 2)
    node.prioritise(auth)
    node.push_vaccine(provider, holder, vaccine.vaccine_id)
    return node, holder, issuer, provider, vaccine


class TestIssueTestCertificate:
    def test_payload_reflects_current_record_and_anchor(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        assert payload.kind == "TestCertificate"
        assert payload.fields["test_result"] == "Negative"
        assert payload.fields["holder_name"] == "Anika Rahman"
        assert payload.fields["issuer_name"] == "Test Lab"
        assert payload.anchor == node.get_anchor(f"testcert:{holder}")
        assert payload.fields_digest() == payload.anchor

    def test_untested_holder_has_no_certificate(self, world):
        node, _, _, _, _ = world
        fresh = onboard_holder(node, "0xH2", "Khulna", nid="NID002")
        with pytest.raises(NoTestOnRecord):
            node.issue_test_certificate(fresh)

    def test_non_holders_cannot_issue(self, world):
        node, _, issuer, provider, _ = world
        for caller in (issuer, provider, authority_of(node)):
            with pytest.raises(Unauthorized):
                node.issue_test_certificate(caller)

    def test_issuance_appends_no_transactions(self, world):
        node, holder, _, _, _ = world
        before = node.chain.height
        node.issue_test_certificate(holder)
        node.issue_vaccine_passport(holder)
        assert node.chain.height == before


class TestIssuePassport:
    def test_dose_one_of_two(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_vaccine_passport(holder)
        assert payload.kind == "VaccinePassport"
        assert payload.fields["dose_number"] == 1
        assert payload.fields["vaccine_taken"] is True
        assert payload.fields["vaccine_name"] == "CoviShield"

    def test_unvaccinated_holder_rejected(self, world):
        node, _, issuer, _, _ = world
        fresh = onboard_holder(node, "0xH2", "Khulna", nid="NID002")
        node.issue_result(issuer, fresh, "Negative")
        with pytest.raises(NotVaccinated):
            node.issue_vaccine_passport(fresh)

    def test_priority_matches_campaign_snapshot(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_vaccine_passport(holder)
        snapshot = node.vaccination.campaign.snapshot()
        level_of = {row["holder_id"]: row["level"] for row in snapshot["holders"]}
        assert payload.fields["priority"] == level_of[holder]


class TestEncoding:
    def test_text_round_trip(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        assert CredentialPayload.from_text(payload.to_text()) == payload

    def test_png_round_trip(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        png = credentials.encode_qr(payload)
        assert credentials.decode_qr(png) == payload

    def test_equal_payloads_encode_byte_identically(self, world):
        node, holder, _, _, _ = world
        a = node.issue_test_certificate(holder)
        b = node.issue_test_certificate(holder)
        assert a == b
        assert credentials.encode_qr(a) == credentials.encode_qr(b)
        assert a.to_text() == b.to_text()

    def test_inlined_photo_bytes_blow_the_capacity(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        bloated = CredentialPayload(
            kind=payload.kind,
            fields=dict(payload.fields, photo="ff" * 5120),  # ~10 KB inline
            anchor=payload.anchor,
            ledger_height=payload.ledger_height,
        )
        with pytest.raises(PayloadTooLarge):
            bloated.to_text()

    def test_garbage_text_rejected(self):
        with pytest.raises(QRDecodeError):
            CredentialPayload.from_text("!!!not-base64url!!!")
        with pytest.raises(QRDecodeError):
            CredentialPayload.from_text("aGVsbG8=")  # valid b64, not a payload


class TestVerification:
    def test_unmodified_credentials_verify(self, world):
        node, holder, _, _, _ = world
        for payload in (
            node.issue_test_certificate(holder),
            node.issue_vaccine_passport(holder),
        ):
            report = node.verify_credential(payload)
            assert report.valid and report.reason is None

    def test_flipped_result_is_anchor_mismatch(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        forged = CredentialPayload(
            kind=payload.kind,
            fields=dict(payload.fields, test_result="Positive"),
            anchor=payload.anchor,
            ledger_height=payload.ledger_height,
        )
        report = node.verify_credential(forged)
        assert not report.valid and report.reason == "AnchorMismatch"

    def test_height_beyond_tip_is_unknown_anchor(self, world):
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        forged = CredentialPayload(
            kind=payload.kind,
            fields=payload.fields,
            anchor=payload.anchor,
            ledger_height=node.chain.height + 10,
        )
        report = node.verify_credential(forged)
        assert not report.valid and report.reason == "UnknownAnchor"

    def test_consistent_forgery_without_onchain_anchor_is_unknown(self, world):
        # attacker fixes the digest to match the edited fields: the anchor
        # then exists nowhere on the chain
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        fields = dict(payload.fields, test_result="Positive")
        forged = CredentialPayload(
            kind=payload.kind,
            fields=fields,
            anchor=CredentialPayload(payload.kind, fields, "", 0).fields_digest(),
            ledger_height=payload.ledger_height,
        )
        report = node.verify_credential(forged)
        assert not report.valid and report.reason == "UnknownAnchor"

    def test_verification_is_public(self, world):
        # module-level call with nothing but the chain: no session, no role
        node, holder, _, _, _ = world
        payload = node.issue_test_certificate(holder)
        assert verify_credential(node.chain, payload).valid

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_any_single_field_mutation_invalidates(self, data):
        node = fast_node()
        issuer = onboard_issuer(node)
        holder = onboard_holder(node, "0xH1", "Dhaka")
        node.issue_result(issuer, holder, "Negative")
        payload = node.issue_test_certificate(holder)

        field = data.draw(st.sampled_from(sorted(payload.fields)))
        original = payload.fields[field]
        if isinstance(original, int):
            mutated = original + data.draw(st.integers(1, 99))
        else:
            mutated = str(original) + data.draw(st.text(min_size=1, max_size=4))
        forged = CredentialPayload(
            kind=payload.kind,
            fields=dict(payload.fields, **{field: mutated}),
            anchor=payload.anchor,
            ledger_height=payload.ledger_height,
        )
        report = node.verify_credential(forged)
        assert not report.valid and report.reason == "AnchorMismatch"


class TestOfflineVerification:
    def test_snapshot_chain_verifies_exported_credential(self, world):
        # verification against a copied chain, no node involved
        node, holder, _, _, _ = world
        from vaxledger.ledger import Blockchain

        payload_text = node.issue_test_certificate(holder).to_text()
        offline_chain = Blockchain(node.chain.config, blocks=list(node.chain.blocks))
        payload = CredentialPayload.from_text(payload_text)
        assert verify_credential(offline_chain, payload).valid
