from rest_framework import serializers

from cohort.serializers import RangeField
from network.models import EncoderFamily, HeadActivation


class SearchSpaceSerializer(serializers.Serializer):
    """
    Search-space file. Discrete dimensions are value lists; the learning rate
    is either a log-uniform ``learning_rate_range`` or explicit
    ``learning_rates``::

        {"hidden": [32, 64], "layers": [2], "families": ["BiLSTM"],
         "learning_rate_range": [1e-4, 1e-2],
         "head_presets": {"small": [32]}}
    """
    hidden = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1, required=False)
    layers = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1, required=False)
    families = serializers.ListField(child=serializers.ChoiceField(choices=EncoderFamily.choices),
                                     min_length=1, required=False)
    learning_rate_range = RangeField(required=False)
    learning_rates = serializers.ListField(child=serializers.FloatField(), min_length=1, required=False)
    head_presets = serializers.DictField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=True),
        allow_empty=False, required=False)
    shared_across_scenes = serializers.BooleanField(required=False)
    head_activation = serializers.ChoiceField(choices=HeadActivation.choices, required=False)
    use_demographics = serializers.BooleanField(required=False)

    def validate_learning_rates(self, value):
        if any(rate <= 0 for rate in value):
            raise serializers.ValidationError('learning rates must be positive')
        return value

    def validate(self, attrs):
        if 'learning_rate_range' in attrs and 'learning_rates' in attrs:
            raise serializers.ValidationError('give either learning_rate_range or learning_rates, not both')
        return attrs


class SearchConfigSerializer(serializers.Serializer):
    trials = serializers.IntegerField(min_value=1, required=False)
    initial_trials = serializers.IntegerField(min_value=1, required=False)
    length_scale = serializers.FloatField(required=False)
    noise = serializers.FloatField(min_value=0.0, required=False)

    def validate_length_scale(self, value):
        if value <= 0:
            raise serializers.ValidationError('length_scale must be positive')
        return value
