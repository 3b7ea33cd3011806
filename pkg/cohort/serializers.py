from rest_framework import serializers

from cohort.models import SCENE_ORDER, DiseaseClass, Label, Sex
from cohort.validators import validate_label_disease, validate_positive


class ManifestEntrySerializer(serializers.Serializer):
    patient_id = serializers.RegexField(r'^[A-Za-z0-9][A-Za-z0-9_.-]*$', max_length=64)
    label = serializers.ChoiceField(choices=Label.choices)
    disease_class = serializers.ChoiceField(choices=DiseaseClass.choices,
                                            default=DiseaseClass.NONE.value)
    age = serializers.IntegerField(min_value=0)
    sex = serializers.ChoiceField(choices=Sex.choices)
    height_cm = serializers.FloatField(validators=[validate_positive])
    weight_kg = serializers.FloatField(validators=[validate_positive])
    sample_rate_hz = serializers.FloatField(default=50.0, validators=[validate_positive])
    scenes = serializers.DictField(child=serializers.CharField(max_length=255))

    def validate_scenes(self, value):
        known = {scene.value for scene in SCENE_ORDER}
        unknown = sorted(set(value) - known)
        if unknown:
            raise serializers.ValidationError(f"unknown scene tags {unknown}")
        for path in value.values():
            if path.startswith('/') or '..' in path.split('/'):
                raise serializers.ValidationError(f"scene path '{path}' must stay inside the dataset")
        return value

    def validate(self, attrs):
        validate_label_disease(attrs['label'], attrs['disease_class'])
        return attrs


class RangeField(serializers.ListField):
    """A ``[low, high]`` pair of positive numbers with ``low <= high``."""

    def __init__(self, **kwargs):
        kwargs.setdefault('child', serializers.FloatField(validators=[validate_positive]))
        kwargs.setdefault('min_length', 2)
        kwargs.setdefault('max_length', 2)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        low, high = super().to_internal_value(data)
        if low > high:
            raise serializers.ValidationError(f"range [{low}, {high}] is not ordered")
        return (low, high)


class CohortSpecSerializer(serializers.Serializer):
    n_healthy = serializers.IntegerField(min_value=0, required=False)
    n_nonhealthy = serializers.IntegerField(min_value=0, required=False)
    class_separation = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    transient_duration_s = serializers.FloatField(min_value=0.0, required=False)
    noise_std = serializers.FloatField(min_value=0.0, required=False)
    seed = serializers.IntegerField(required=False)
    sample_rate_hz = serializers.FloatField(validators=[validate_positive], required=False)
    duration_s = serializers.FloatField(validators=[validate_positive], required=False)
    breath_rate_hz = serializers.DictField(child=RangeField(), required=False)
    amplitude = serializers.DictField(
        child=serializers.DictField(child=RangeField()), required=False)
    disease_mix = serializers.DictField(
        child=serializers.FloatField(min_value=0.0), required=False)

    def validate_breath_rate_hz(self, value):
        return self._complete_labels(value, 'breath_rate_hz')

    def validate_amplitude(self, value):
        value = self._complete_labels(value, 'amplitude')
        known = {scene.value for scene in SCENE_ORDER}
        for label, per_scene in value.items():
            if set(per_scene) != known:
                raise serializers.ValidationError(
                    f"amplitude for {label} needs exactly the scenes {sorted(known)}")
        return value

    def validate_disease_mix(self, value):
        allowed = {c.value for c in DiseaseClass} - {DiseaseClass.NONE.value}
        unknown = sorted(set(value) - allowed)
        if unknown:
            raise serializers.ValidationError(f"unknown disease classes {unknown}")
        return value

    @staticmethod
    def _complete_labels(value, name):
        if set(value) != {label.value for label in Label}:
            raise serializers.ValidationError(f"{name} needs one entry for each of H and NH")
        return value
